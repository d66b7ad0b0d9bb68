/// How independent replications are scheduled.
///
/// Every plan yields the same values in the same order: replication `i`
/// only depends on its own random stream and results are collected by
/// index before any reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecutionPlan {
    Sequential,
    /// Rayon's global pool.
    #[default]
    Parallel,
    /// A dedicated rayon pool with this many threads.
    Workers(usize),
}

impl ExecutionPlan {
    pub fn from_workers(workers: Option<usize>) -> Self {
        match workers {
            None => ExecutionPlan::Parallel,
            Some(1) => ExecutionPlan::Sequential,
            Some(n) => ExecutionPlan::Workers(n),
        }
    }

    /// Evaluates `f(0), f(1), .., f(count - 1)` and returns them in index order.
    pub fn map_indexed<T, F>(self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        match self {
            ExecutionPlan::Sequential => (0..count).map(f).collect(),
            #[cfg(feature = "parallel")]
            ExecutionPlan::Parallel => {
                use rayon::prelude::*;
                (0..count).into_par_iter().map(f).collect()
            }
            #[cfg(feature = "parallel")]
            ExecutionPlan::Workers(n) => {
                use rayon::prelude::*;
                match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
                    Err(_) => (0..count).map(f).collect(),
                }
            }
            #[cfg(not(feature = "parallel"))]
            _ => (0..count).map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plans_agree_on_order() {
        let f = |i: u64| i.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 7;
        let seq = ExecutionPlan::Sequential.map_indexed(1000, f);
        assert_eq!(seq, ExecutionPlan::Parallel.map_indexed(1000, f));
        assert_eq!(seq, ExecutionPlan::Workers(3).map_indexed(1000, f));
    }

    #[test]
    fn workers_one_is_sequential() {
        assert_eq!(ExecutionPlan::from_workers(Some(1)), ExecutionPlan::Sequential);
        assert_eq!(ExecutionPlan::from_workers(None), ExecutionPlan::Parallel);
    }
}
