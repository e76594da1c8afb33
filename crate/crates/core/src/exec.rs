//! Execution strategy for the per-point loops.
//!
//! The grid operations map an independent closure over every mesh index.
//! `map_grid` runs that map either on the calling thread or, with the
//! `parallel` feature, over rayon's pool. The parallel path collects in index
//! order and each closure accumulates its own sum sequentially, so both modes
//! produce bitwise identical results.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl ExecMode {
    /// Preferred mode for the current build: parallel when available.
    pub(crate) fn default_mode() -> ExecMode {
        #[cfg(feature = "parallel")]
        {
            ExecMode::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            ExecMode::Sequential
        }
    }
}

pub(crate) fn map_grid<F>(mode: ExecMode, len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Send + Sync,
{
    match mode {
        ExecMode::Sequential => (0..len).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_map_is_in_order() {
        let v = map_grid(ExecMode::Sequential, 4, |i| i as f64 * 2.0);
        assert_eq!(v, vec![0.0, 2.0, 4.0, 6.0]);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_map_matches_sequential() {
        let f = |i: usize| (i as f64).sin() + i as f64;
        let seq = map_grid(ExecMode::Sequential, 1000, f);
        let par = map_grid(ExecMode::Parallel, 1000, f);
        assert_eq!(seq, par);
    }
}
