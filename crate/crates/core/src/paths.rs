//! Finite schedules of sample-size pairs `(n1, n2)`.
//!
//! A path is the finite, inspectable part of a cofinal map into the
//! product-ordered index set: the diagonal `(k, k)`, the ratio-to-zero and
//! ratio-to-infinity constructions `(n2, n2^2)` and `(n1, floor(sqrt n1))`,
//! the ratio-to-kappa construction `(phi'_kappa(r), r + 1)`, fixed-ratio
//! and iterated (one index pinned) schedules, and the
//! `n2 > n1 ln(ln n1)` design. Each path records the ratio limit `kappa`
//! its construction targets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::stats::Kappa;
use crate::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexPoint {
    pub n1: u64,
    pub n2: u64,
}

impl IndexPoint {
    pub fn new(n1: u64, n2: u64) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return domain(format!("index point ({n1}, {n2}) must have positive coordinates"));
        }
        Ok(IndexPoint { n1, n2 })
    }

    /// `e = n1 / n2`.
    pub fn ratio(&self) -> f64 {
        self.n1 as f64 / self.n2 as f64
    }

    /// Product order: `self >= other` in both coordinates.
    pub fn dominates(&self, other: &IndexPoint) -> bool {
        self.n1 >= other.n1 && self.n2 >= other.n2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathKind {
    Diagonal,
    PhiZero,
    PhiInfinity,
    PhiKappa(f64),
    /// `n1 = round(ratio * n2)`.
    FixedRatio(f64),
    /// `n1` pinned, `n2` growing.
    IteratedFixFirst(u64),
    /// `n2` pinned, `n1` growing.
    IteratedFixSecond(u64),
    LogLogDesign,
}

impl PathKind {
    /// The ratio limit `lim e` targeted by the construction.
    pub fn kappa_target(&self) -> Kappa {
        match *self {
            PathKind::Diagonal => Kappa::ONE,
            PathKind::PhiZero | PathKind::IteratedFixFirst(_) | PathKind::LogLogDesign => Kappa::ZERO,
            PathKind::PhiInfinity | PathKind::IteratedFixSecond(_) => Kappa::INFINITY,
            PathKind::PhiKappa(k) | PathKind::FixedRatio(k) => Kappa::new(k).unwrap_or(Kappa::ONE),
        }
    }

    /// Builds the path from its driving sequence: `k` for the diagonal,
    /// `n2` for phi_zero and fixed_ratio, `n1` for phi_infinity, loglog
    /// and iterated_fix_n2, `r` for phi_kappa, `n2` for iterated_fix_n1.
    pub fn build(&self, sizes: &[u64]) -> Result<IndexPath> {
        match *self {
            PathKind::Diagonal => diagonal_path(sizes),
            PathKind::PhiZero => {
                check_increasing(sizes)?;
                IndexPath::new(*self, sizes.iter().map(|&n| phi_zero_point(n)).collect::<Result<_>>()?)
            }
            PathKind::PhiInfinity => {
                check_increasing(sizes)?;
                IndexPath::new(*self, sizes.iter().map(|&n| phi_infinity_point(n)).collect::<Result<_>>()?)
            }
            PathKind::PhiKappa(k) => {
                check_increasing(sizes)?;
                IndexPath::new(*self, sizes.iter().map(|&r| phi_kappa_point(k, r)).collect::<Result<_>>()?)
            }
            PathKind::FixedRatio(ratio) => fixed_ratio_path(ratio, sizes),
            PathKind::IteratedFixFirst(n1) => iterated_schedule(FixedCoordinate::First, n1, sizes),
            PathKind::IteratedFixSecond(n2) => iterated_schedule(FixedCoordinate::Second, n2, sizes),
            PathKind::LogLogDesign => loglog_design_path(sizes),
        }
    }
}

impl fmt::Display for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathKind::Diagonal => f.write_str("diagonal"),
            PathKind::PhiZero => f.write_str("phi_zero"),
            PathKind::PhiInfinity => f.write_str("phi_infinity"),
            PathKind::PhiKappa(k) => write!(f, "phi_kappa:{k}"),
            PathKind::FixedRatio(c) => write!(f, "fixed_ratio:{c}"),
            PathKind::IteratedFixFirst(n) => write!(f, "iterated_fix_n1:{n}"),
            PathKind::IteratedFixSecond(n) => write!(f, "iterated_fix_n2:{n}"),
            PathKind::LogLogDesign => f.write_str("loglog"),
        }
    }
}

impl FromStr for PathKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let real = |what: &str| -> Result<f64> {
            let a = arg.ok_or_else(|| Error::Domain(format!("path kind {name} needs a parameter, e.g. {name}:{what}")))?;
            let v: f64 = a
                .parse()
                .map_err(|_| Error::Domain(format!("path kind {name}: cannot parse parameter {a:?}")))?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                domain(format!("path kind {name}: parameter must be positive and finite, got {v}"))
            }
        };
        let count = || -> Result<u64> {
            let v = real("20")?;
            if v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                domain(format!("path kind {name}: parameter must be an integer, got {v}"))
            }
        };
        let no_arg = |kind: PathKind| match arg {
            None => Ok(kind),
            Some(a) => domain(format!("path kind {name} takes no parameter, got {a:?}")),
        };
        match name {
            "diagonal" => no_arg(PathKind::Diagonal),
            "phi_zero" => no_arg(PathKind::PhiZero),
            "phi_infinity" => no_arg(PathKind::PhiInfinity),
            "loglog" => no_arg(PathKind::LogLogDesign),
            "phi_kappa" => Ok(PathKind::PhiKappa(real("2.0")?)),
            "fixed_ratio" => Ok(PathKind::FixedRatio(real("4")?)),
            "iterated_fix_n1" => Ok(PathKind::IteratedFixFirst(count()?)),
            "iterated_fix_n2" => Ok(PathKind::IteratedFixSecond(count()?)),
            other => domain(format!(
                "unknown path kind {other:?}; expected one of diagonal, phi_zero, phi_infinity, \
                 phi_kappa:<k>, fixed_ratio:<c>, iterated_fix_n1:<n>, iterated_fix_n2:<n>, loglog"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexPath {
    points: Vec<IndexPoint>,
    kind: PathKind,
    kappa_target: Kappa,
}

impl IndexPath {
    fn new(kind: PathKind, points: Vec<IndexPoint>) -> Result<Self> {
        if points.is_empty() {
            return domain(format!("{kind} path has no points"));
        }
        Ok(IndexPath {
            points,
            kind,
            kappa_target: kind.kappa_target(),
        })
    }

    /// A one-point path, for experiments at a single index point.
    pub fn single(kind: PathKind, point: IndexPoint) -> Self {
        IndexPath {
            points: vec![point],
            kind,
            kappa_target: kind.kappa_target(),
        }
    }

    pub fn points(&self) -> &[IndexPoint] {
        &self.points
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn kappa_target(&self) -> Kappa {
        self.kappa_target
    }

    pub fn last(&self) -> IndexPoint {
        *self.points.last().expect("paths are nonempty")
    }
}

fn check_increasing(xs: &[u64]) -> Result<()> {
    if xs.is_empty() {
        return domain("path sizes must be nonempty");
    }
    if xs.contains(&0) {
        return domain("path sizes must be positive");
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return domain(format!("path sizes must be strictly increasing, got {xs:?}"));
    }
    Ok(())
}

/// Integer part on `[1, inf)`.
fn int_part(x: f64) -> u64 {
    debug_assert!(x >= 1.0);
    x.floor() as u64
}

/// `(k, k)` for each `k`.
pub fn diagonal_path(ks: &[u64]) -> Result<IndexPath> {
    check_increasing(ks)?;
    IndexPath::new(PathKind::Diagonal, ks.iter().map(|&k| IndexPoint { n1: k, n2: k }).collect())
}

/// `(n1, j(sqrt n1))`; the ratio is at least `sqrt n1`.
pub fn phi_infinity_point(n1: u64) -> Result<IndexPoint> {
    if n1 == 0 {
        return domain("phi_infinity_point: n1 must be positive");
    }
    let mut root = int_part((n1 as f64).sqrt());
    // guard against rounding of the floating-point square root
    while root * root > n1 {
        root -= 1;
    }
    while (root + 1) * (root + 1) <= n1 {
        root += 1;
    }
    Ok(IndexPoint { n1, n2: root })
}

/// `(n2, n2^2)`; the ratio is exactly `1 / n2`.
pub fn phi_zero_point(n2: u64) -> Result<IndexPoint> {
    if n2 == 0 {
        return domain("phi_zero_point: n2 must be positive");
    }
    let sq = n2
        .checked_mul(n2)
        .ok_or_else(|| Error::Domain(format!("phi_zero_point: n2 = {n2} overflows")))?;
    Ok(IndexPoint { n1: n2, n2: sq })
}

/// Larger root of `kappa r^2 + (kappa - 1 - n1) r - 1`.
pub fn rhat_star(kappa: f64, n1: u64) -> Result<f64> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return domain(format!("rhat_star: kappa must be positive and finite, got {kappa}"));
    }
    let b = kappa - 1.0 - n1 as f64;
    let disc = (b * b + 4.0 * kappa).sqrt();
    // the two forms agree; pick the one without cancellation
    if b <= 0.0 {
        Ok((disc - b) / (2.0 * kappa))
    } else {
        Ok(2.0 / (disc + b))
    }
}

/// `phi'_kappa(r) = j(max((r + 1)(kappa - 1/r), 0) + 1)`.
pub fn phi_kappa_prime(kappa: f64, r: u64) -> Result<u64> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return domain(format!("phi_kappa: kappa must be positive and finite, got {kappa}"));
    }
    if r == 0 {
        return domain("phi_kappa: r must be at least 1");
    }
    let rf = r as f64;
    let inner = ((rf + 1.0) * (kappa * rf - 1.0) / rf).max(0.0);
    Ok(int_part(inner + 1.0))
}

/// `(phi'_kappa(r), r + 1)`, whose ratio tends to `kappa`.
pub fn phi_kappa_point(kappa: f64, r: u64) -> Result<IndexPoint> {
    Ok(IndexPoint {
        n1: phi_kappa_prime(kappa, r)?,
        n2: r + 1,
    })
}

/// Guaranteed `|e - kappa|` along the phi_kappa path, valid once `r >= ceil(1/kappa)`.
pub fn phi_kappa_ratio_bound(r: u64) -> f64 {
    1.0 / r as f64 + 1.0 / (r as f64 + 1.0)
}

/// `n2` such that `phi_zero_point(n2)` dominates `target`.
pub fn phi_zero_witness(target: IndexPoint) -> u64 {
    target.n1.max(target.n2)
}

/// `n1` such that `phi_infinity_point(n1)` dominates `target`.
pub fn phi_infinity_witness(target: IndexPoint) -> u64 {
    target.n1.max(target.n2 * target.n2)
}

/// `r` such that `phi_kappa_point(kappa, r)` dominates `target`.
pub fn phi_kappa_witness(kappa: f64, target: IndexPoint) -> Result<u64> {
    let root = rhat_star(kappa, target.n1)?;
    Ok(int_part(root.abs() + 1.0).max(target.n2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedCoordinate {
    First,
    Second,
}

/// One coordinate pinned at `fixed`, the other sweeping `growing`.
pub fn iterated_schedule(fix: FixedCoordinate, fixed: u64, growing: &[u64]) -> Result<IndexPath> {
    if fixed == 0 {
        return domain("iterated_schedule: pinned size must be positive");
    }
    check_increasing(growing)?;
    let (kind, points) = match fix {
        FixedCoordinate::First => (
            PathKind::IteratedFixFirst(fixed),
            growing.iter().map(|&n| IndexPoint { n1: fixed, n2: n }).collect(),
        ),
        FixedCoordinate::Second => (
            PathKind::IteratedFixSecond(fixed),
            growing.iter().map(|&n| IndexPoint { n1: n, n2: fixed }).collect(),
        ),
    };
    IndexPath::new(kind, points)
}

/// `(n1, j(n1 ln(ln n1)) + 1)`: the smallest `n2` with `n2 > n1 ln(ln n1)`.
pub fn loglog_design_path(n1s: &[u64]) -> Result<IndexPath> {
    check_increasing(n1s)?;
    if let Some(&bad) = n1s.iter().find(|&&n| n < 16) {
        return domain(format!("loglog design needs n1 >= 16, got {bad}"));
    }
    let points = n1s
        .iter()
        .map(|&n1| {
            let bound = n1 as f64 * (n1 as f64).ln().ln();
            IndexPoint {
                n1,
                n2: int_part(bound) + 1,
            }
        })
        .collect();
    IndexPath::new(PathKind::LogLogDesign, points)
}

/// `(round(ratio * n2), n2)` for each `n2`.
pub fn fixed_ratio_path(ratio: f64, n2s: &[u64]) -> Result<IndexPath> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return domain(format!("fixed_ratio: ratio must be positive and finite, got {ratio}"));
    }
    check_increasing(n2s)?;
    let points = n2s
        .iter()
        .map(|&n2| {
            let n1 = (ratio * n2 as f64).round() as u64;
            IndexPoint::new(n1, n2)
        })
        .collect::<Result<_>>()?;
    IndexPath::new(PathKind::FixedRatio(ratio), points)
}

#[cfg(test)]
mod tests {
    use super::*;

    const KAPPAS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 4.0];

    #[test]
    fn diagonal() {
        let p = diagonal_path(&[3]).unwrap();
        assert_eq!(p.points(), &[IndexPoint { n1: 3, n2: 3 }]);
        let p = diagonal_path(&[1, 2, 3]).unwrap();
        assert!(p.points().iter().all(|q| q.ratio() == 1.0));
        assert_eq!(diagonal_path(&[10, 100, 1000]).unwrap().kappa_target(), Kappa::ONE);
        assert!(diagonal_path(&[3, 3]).is_err());
        assert!(diagonal_path(&[5, 2]).is_err());
        assert!(diagonal_path(&[]).is_err());
    }

    #[test]
    fn phi_infinity() {
        let p = phi_infinity_point(100).unwrap();
        assert_eq!((p.n1, p.n2, p.ratio()), (100, 10, 10.0));
        let p = phi_infinity_point(2).unwrap();
        assert_eq!((p.n1, p.n2, p.ratio()), (2, 1, 2.0));
        for n1 in 1..=1_000_000u64 {
            let p = phi_infinity_point(n1).unwrap();
            // e >= sqrt(n1)  <=>  n1 >= n2^2 for integers
            assert!(p.n2 * p.n2 <= n1 && p.ratio() >= (n1 as f64).sqrt(), "n1={n1}");
        }
    }

    #[test]
    fn phi_zero() {
        let p = phi_zero_point(5).unwrap();
        assert_eq!((p.n1, p.n2, p.ratio()), (5, 25, 0.2));
        let p = phi_zero_point(1).unwrap();
        assert_eq!((p.n1, p.n2, p.ratio()), (1, 1, 1.0));
        for n2 in 1..=100_000u64 {
            let p = phi_zero_point(n2).unwrap();
            assert_eq!(p.ratio(), 1.0 / n2 as f64);
        }
        assert!(phi_zero_point(0).is_err());
    }

    #[test]
    fn rhat_star_cases() {
        assert!((rhat_star(1.0, 1).unwrap() - 1.618_033_988_749_895).abs() < 1e-12);
        assert!(rhat_star(0.0, 1).is_err());
        assert!(rhat_star(-1.0, 1).is_err());
        for &k in &[0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 37.5] {
            for n1 in [1u64, 2, 10, 1000, 1_000_000] {
                let r = rhat_star(k, n1).unwrap();
                let q = k * r * r + (k - 1.0 - n1 as f64) * r - 1.0;
                // residual relative to the size of the terms
                let scale = (k * r * r).max(1.0);
                assert!(q.abs() <= 1e-9 * scale, "k={k} n1={n1}: {q}");
                let first = r.floor() as u64 + 1;
                for rr in first..first + 50 {
                    let lhs = (rr as f64 + 1.0) * (k - 1.0 / rr as f64);
                    assert!(lhs > n1 as f64, "k={k} n1={n1} r={rr}");
                }
            }
        }
    }

    #[test]
    fn phi_kappa_cases() {
        let p = phi_kappa_point(2.0, 10).unwrap();
        assert_eq!((p.n1, p.n2), (21, 11));
        assert!((p.ratio() - 1.909_090_909_090_909).abs() < 1e-12);
        let p = phi_kappa_point(1.0, 1).unwrap();
        assert_eq!((p.n1, p.n2, p.ratio()), (1, 2, 0.5));
        assert!(phi_kappa_point(0.0, 1).is_err());
        assert!(phi_kappa_point(1.0, 0).is_err());
    }

    #[test]
    fn phi_kappa_sandwich_monotonicity_and_ratio() {
        for &k in &KAPPAS {
            let mut prev = 0;
            let start = (1.0 / k).ceil() as u64;
            for r in 1..=10_000u64 {
                let p = phi_kappa_point(k, r).unwrap();
                assert!(p.n1 >= prev, "k={k} r={r}");
                prev = p.n1;
                let floor = (k - 1.0 / r as f64).max(0.0);
                let scaled = p.n1 as f64 / (r as f64 + 1.0);
                assert!(floor < scaled && scaled <= floor + 1.0 / (r as f64 + 1.0) + 1e-15);
                if r >= start {
                    assert!((p.ratio() - k).abs() <= phi_kappa_ratio_bound(r), "k={k} r={r}");
                }
            }
        }
    }

    #[test]
    fn cofinality_witnesses() {
        for m1 in (1..200).step_by(7) {
            for m2 in (1..200).step_by(11) {
                let t = IndexPoint { n1: m1, n2: m2 };
                assert!(phi_zero_point(phi_zero_witness(t)).unwrap().dominates(&t));
                assert!(phi_infinity_point(phi_infinity_witness(t)).unwrap().dominates(&t));
                for &k in &KAPPAS {
                    let r = phi_kappa_witness(k, t).unwrap();
                    assert!(phi_kappa_point(k, r).unwrap().dominates(&t), "k={k} t={t:?}");
                }
            }
        }
    }

    #[test]
    fn iterated() {
        let p = iterated_schedule(FixedCoordinate::Second, 20, &[1_000, 10_000, 100_000]).unwrap();
        assert_eq!(
            p.points(),
            &[
                IndexPoint { n1: 1_000, n2: 20 },
                IndexPoint { n1: 10_000, n2: 20 },
                IndexPoint { n1: 100_000, n2: 20 }
            ]
        );
        assert!(p.points().windows(2).all(|w| w[1].ratio() > w[0].ratio()));
        assert!(p.kappa_target().is_infinite());
        let q = iterated_schedule(FixedCoordinate::First, 20, &[1_000, 10_000]).unwrap();
        assert_eq!(q.points()[1], IndexPoint { n1: 20, n2: 10_000 });
        assert_eq!(q.kappa_target(), Kappa::ZERO);
    }

    #[test]
    fn loglog() {
        let p = loglog_design_path(&[50]).unwrap();
        assert_eq!(p.points()[0], IndexPoint { n1: 50, n2: 69 });
        let p = loglog_design_path(&[50, 500, 5000]).unwrap();
        assert!(p.points().windows(2).all(|w| w[1].ratio() < w[0].ratio()));
        for q in p.points() {
            assert!(q.n2 as f64 > q.n1 as f64 * (q.n1 as f64).ln().ln());
        }
        assert!(loglog_design_path(&[15]).is_err());
        assert_eq!(p.kappa_target(), Kappa::ZERO);
    }

    #[test]
    fn fixed_ratio() {
        let p = fixed_ratio_path(4.0, &[2500, 5000]).unwrap();
        assert_eq!(p.last(), IndexPoint { n1: 20_000, n2: 5000 });
        assert_eq!(p.kappa_target(), Kappa::new(4.0).unwrap());
        assert!(fixed_ratio_path(0.0, &[1]).is_err());
        assert!(fixed_ratio_path(0.1, &[1]).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for s in [
            "diagonal",
            "phi_zero",
            "phi_infinity",
            "phi_kappa:2",
            "fixed_ratio:4",
            "iterated_fix_n2:20",
            "iterated_fix_n1:7",
            "loglog",
        ] {
            let k: PathKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert_eq!("phi_kappa:2.0".parse::<PathKind>().unwrap(), PathKind::PhiKappa(2.0));
        for bad in ["spiral", "phi_kappa", "phi_kappa:-1", "diagonal:3", "iterated_fix_n2:2.5"] {
            assert!(bad.parse::<PathKind>().is_err(), "{bad}");
        }
    }
}
