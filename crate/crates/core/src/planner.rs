//! Next-best-view selection and the non-learning baselines.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::mesh::{score, union_coverage, Submesh};
use crate::visibility::CoverageTable;
use crate::{Error, Result};

/// Scores within this relative distance of the current best count as ties,
/// which then go to the lowest view index.
pub const SCORE_TIE_RTOL: f64 = 1e-12;

/// Views selected so far and the submesh they cover together.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageState {
    chosen: FixedBitSet,
    covered: Submesh,
    order: Vec<usize>,
}

impl CoverageState {
    pub fn empty(table: &CoverageTable) -> Self {
        CoverageState {
            chosen: FixedBitSet::with_capacity(table.view_count()),
            covered: Submesh::empty(table.mesh()),
            order: Vec::new(),
        }
    }

    pub fn from_views(table: &CoverageTable, views: &[usize]) -> Result<Self> {
        let mut state = Self::empty(table);
        for &v in views {
            state.select(table, v)?;
        }
        Ok(state)
    }

    /// Adds `view` to the state. Re-selecting a view is an error.
    pub fn select(&mut self, table: &CoverageTable, view: usize) -> Result<()> {
        self.check(table)?;
        if view >= table.view_count() {
            return Err(Error::input(format!(
                "view {view} out of range ({} views)",
                table.view_count()
            )));
        }
        if self.chosen.contains(view) {
            return Err(Error::input(format!("view {view} already selected")));
        }
        self.covered = union_coverage(table.mesh(), &self.covered, table.coverage(view))?;
        self.chosen.insert(view);
        self.order.push(view);
        Ok(())
    }

    pub fn chosen(&self) -> &FixedBitSet {
        &self.chosen
    }

    pub fn covered(&self) -> &Submesh {
        &self.covered
    }

    /// Selections in the order they were made.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn step(&self) -> usize {
        self.order.len()
    }

    fn check(&self, table: &CoverageTable) -> Result<()> {
        if self.chosen.len() != table.view_count()
            || self.covered.mesh_digest() != table.mesh_digest()
        {
            return Err(Error::input("coverage state does not belong to this table"));
        }
        Ok(())
    }
}

/// Best next view for score exponent `lambda`, or `None` once no unchosen
/// view adds a new triangle.
///
/// Candidates are the unchosen views that add at least one triangle and
/// overlap the current coverage (any such view when nothing is covered yet).
/// If none overlaps, every gaining view is considered so a disconnected part
/// of the surface can be started.
pub fn nbv(state: &CoverageState, table: &CoverageTable, lambda: f64) -> Result<Option<usize>> {
    state.check(table)?;
    let covered = &state.covered;
    let mut overlapping = Vec::new();
    let mut detached = Vec::new();
    for (v, cov) in table.coverages().iter().enumerate() {
        if state.chosen.contains(v) || cov.gain_over(covered) == 0 {
            continue;
        }
        if covered.is_empty() || cov.overlaps(covered) {
            overlapping.push(v);
        } else {
            detached.push(v);
        }
    }
    let candidates = if overlapping.is_empty() {
        detached
    } else {
        overlapping
    };

    let mut best: Option<(usize, f64)> = None;
    for v in candidates {
        let union = union_coverage(table.mesh(), covered, table.coverage(v))?;
        let s = score(&union, lambda)?;
        match best {
            Some((_, b)) if s <= b + SCORE_TIE_RTOL * b.abs() => {}
            _ => best = Some((v, s)),
        }
    }
    Ok(best.map(|(v, _)| v))
}

/// Relative slack on the coverage threshold, absorbing summation rounding.
pub const RCC_RTOL: f64 = 1e-12;

/// `covered >= rcc * achievable`, up to [`RCC_RTOL`].
pub fn meets_rcc(covered: f64, achievable: f64, rcc: f64) -> bool {
    covered >= rcc * achievable * (1.0 - RCC_RTOL)
}

/// Whether the relative coverage criterion `rcc` is met.
pub fn is_terminal(state: &CoverageState, table: &CoverageTable, rcc: f64) -> bool {
    meets_rcc(state.covered.area(), table.achievable().area(), rcc)
}

pub(crate) fn check_rcc(rcc: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rcc) {
        Ok(())
    } else {
        Err(Error::input(format!("rcc must lie in [0, 1], got {rcc}")))
    }
}

/// Covered fraction of the achievable area.
pub fn coverage_fraction(state: &CoverageState, table: &CoverageTable) -> f64 {
    let total = table.achievable().area();
    if total > 0.0 {
        state.covered.area() / total
    } else {
        1.0
    }
}

/// Ordered view selection produced by one planning method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub order: Vec<usize>,
    pub lambdas: Vec<f64>,
    #[serde(rename = "coverage_fraction")]
    pub final_coverage_fraction: f64,
    pub method: String,
    /// False when candidates ran out before the coverage criterion was met.
    #[serde(default = "default_true")]
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
}

fn default_true() -> bool {
    true
}

impl Plan {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub(crate) fn from_state(
        state: &CoverageState,
        table: &CoverageTable,
        lambdas: Vec<f64>,
        method: &str,
        complete: bool,
    ) -> Self {
        Plan {
            order: state.order.clone(),
            lambdas,
            final_coverage_fraction: coverage_fraction(state, table),
            method: method.to_string(),
            complete,
            runtime_seconds: None,
            instance: Some(format!("{:016x}", table.digest())),
        }
    }
}

/// Runs next-best-view selection with `lambda_at(k)` as the exponent of the
/// k-th selection (1-based) until `rcc` is reached.
pub fn run_schedule<F>(
    table: &CoverageTable,
    rcc: f64,
    start: Option<usize>,
    method: &str,
    mut lambda_at: F,
) -> Result<Plan>
where
    F: FnMut(usize) -> f64,
{
    check_rcc(rcc)?;
    let mut state = CoverageState::empty(table);
    let mut lambdas = Vec::new();
    if let Some(v) = start {
        state.select(table, v)?;
    }
    while !is_terminal(&state, table, rcc) {
        let lambda = lambda_at(state.step() + 1);
        match nbv(&state, table, lambda)? {
            Some(v) => {
                state.select(table, v)?;
                lambdas.push(lambda);
            }
            None => return Ok(Plan::from_state(&state, table, lambdas, method, false)),
        }
    }
    Ok(Plan::from_state(&state, table, lambdas, method, true))
}

/// λ-greedy planning with a fixed exponent. `lambda = 0` is plain greedy.
pub fn run_fixed_lambda(
    table: &CoverageTable,
    lambda: f64,
    rcc: f64,
    start: Option<usize>,
) -> Result<Plan> {
    let method = if lambda == 0.0 {
        "greedy".to_string()
    } else {
        format!("fixed-lambda-{lambda}")
    };
    run_schedule(table, rcc, start, &method, |_| lambda)
}

/// Greedy first step, then λ alternates 1, 0, 1, ... from the second step on.
pub fn run_alternating(table: &CoverageTable, rcc: f64) -> Result<Plan> {
    run_schedule(table, rcc, None, "alt-lambda", alternating_lambda)
}

pub fn alternating_lambda(step: usize) -> f64 {
    if step >= 2 && step.is_multiple_of(2) {
        1.0
    } else {
        0.0
    }
}
