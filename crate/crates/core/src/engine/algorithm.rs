use std::sync::Arc;

use super::classify::{check_window, grid_points, iterate_state, Classification, GridSpec};
use super::{classify, make_seed, BoundIterate, SeedKind, TailSide};
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct AlgorithmStep {
    pub iterate: BoundIterate,
    pub classification: Classification,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// The C flag was raised while examining iterate `at`.
    Flag { at: usize },
    /// An iterate satisfied both conditions; it is stored as both bounds.
    Exact { at: usize },
    MaxIter,
}

#[derive(Clone, Debug)]
pub struct AlgorithmResult {
    pub steps: Vec<AlgorithmStep>,
    /// Index of the last stored P_L, `None` if none was produced.
    pub lower: Option<usize>,
    /// Index of the last stored P_U, `None` if none was produced.
    pub upper: Option<usize>,
    pub stop: StopReason,
}

impl AlgorithmResult {
    pub fn lower_iterate(&self) -> Option<&BoundIterate> {
        self.lower.map(|i| &self.steps[i].iterate)
    }

    pub fn upper_iterate(&self) -> Option<&BoundIterate> {
        self.upper.map(|i| &self.steps[i].iterate)
    }
}

/// Conjunctions over the sub-grid for the pair (P_i, P_{i+1}).
#[derive(Default)]
struct PairChecks {
    /// P_i > 0 and P_i′ has the generator sign.
    generator: bool,
    cur_upper: bool,
    next_upper: bool,
    next_lower: bool,
    /// Sum condition for an upper → lower flip.
    tight_down: bool,
    /// Sum condition for a lower → upper flip.
    tight_up: bool,
}

fn pair_checks(next: &BoundIterate, pts: &[f64], tol: f64) -> PairChecks {
    let mut c = PairChecks { generator: true, cur_upper: true, next_upper: true, next_lower: true, tight_down: true, tight_up: true };
    for &x in pts {
        match iterate_state(next, x) {
            Ok(s) => {
                let prev = s.rho_prev.unwrap_or(f64::NAN);
                c.generator &= s.valid;
                c.cur_upper &= prev >= -tol;
                c.next_upper &= s.rho >= -tol;
                c.next_lower &= s.rho <= tol;
                c.tight_down &= s.rho + prev >= -tol;
                c.tight_up &= s.rho + prev <= tol;
            }
            Err(_) => return PairChecks::default(),
        }
    }
    c
}

/// The iterative loop for the right or left tail.
///
/// The "for all x beyond x0" conditions are checked on a grid over
/// [x0, b] (right) or [a, x0] (left). Each returned iterate is also
/// classified on the full window.
#[allow(clippy::too_many_arguments)]
pub fn run_algorithm(
    dist: impl Into<Arc<DistributionSpec>>,
    seed: SeedKind,
    side: TailSide,
    x0: f64,
    max_iter: usize,
    window: (f64, f64),
    grid: &GridSpec,
    tol: f64,
) -> Result<AlgorithmResult> {
    let p0 = make_seed(dist, seed, side)?;
    check_window(&p0, window)?;
    let sub = match side {
        TailSide::Right => (x0, window.1),
        TailSide::Left => (window.0, x0),
    };
    if !(x0 >= window.0 && x0 <= window.1) {
        return Err(Error::WindowTooSmall(format!("x0 = {x0} outside the window [{}, {}]", window.0, window.1)));
    }
    let pts = grid_points(sub.0, sub.1, grid)?;

    let seed_ok = pts.iter().try_fold((true, true), |(up, lo), &x| {
        let s = iterate_state(&p0, x).ok()?;
        s.valid.then_some((up && s.rho >= -tol, lo && s.rho <= tol))
    });
    if !matches!(seed_ok, Some((true, _)) | Some((_, true))) {
        return Err(Error::SeedInvalid(format!(
            "P0 is neither an upper nor a lower bound on [{}, {}]",
            sub.0, sub.1
        )));
    }

    let mut steps = vec![AlgorithmStep { classification: classify(&p0, window, grid, tol)?, iterate: p0 }];
    let (mut lower, mut upper) = (None, None);
    let mut stop = StopReason::MaxIter;
    let mut i = 0;
    while i < max_iter {
        let next = steps[i].iterate.iterate()?;
        let c = pair_checks(&next, &pts, tol);
        let classification = classify(&next, window, grid, tol)?;
        steps.push(AlgorithmStep { iterate: next, classification });
        let j = i + 1;
        let mut flag = false;
        if !c.generator {
            flag = true;
        } else if c.next_upper && c.next_lower {
            lower = Some(j);
            upper = Some(j);
            stop = StopReason::Exact { at: j };
            break;
        } else if c.cur_upper {
            if c.next_upper {
                upper = Some(j);
            } else if c.next_lower && c.tight_down {
                lower = Some(j);
            } else {
                flag = true;
            }
        } else if c.next_upper && c.tight_up {
            upper = Some(j);
        } else if c.next_lower {
            lower = Some(j);
        } else {
            flag = true;
        }
        if flag {
            stop = StopReason::Flag { at: i };
            break;
        }
        i += 1;
    }
    Ok(AlgorithmResult { steps, lower, upper, stop })
}
