use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::Instant;

use super::{record_eval, Algorithm, SolveReport, SolveStatus, SolverConfig, TraceEvent};
use crate::bounds::{self, DegenerateCase};
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::trs::{eval_g, GEvaluation};
use crate::underestimate::IntervalNode;

/// Heap entry: smallest `lb` first, earliest creation on ties.
struct Queued {
    seq: u64,
    node: IntervalNode,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap.
        other.node.lb.total_cmp(&self.node.lb).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Mutable state of one branch-and-bound run.
pub struct SearchState {
    /// Best `G` value seen.
    pub ub: f64,
    pub alpha_star: f64,
    pub best: Arc<GEvaluation>,
    /// Number of `G` evaluations.
    pub k: usize,
    /// Smallest `lb` among discarded nodes.
    pub pruned_lb: f64,
    pub trace: Vec<TraceEvent>,
    active: BinaryHeap<Queued>,
    next_seq: u64,
}

impl SearchState {
    fn new(first: Arc<GEvaluation>) -> Self {
        let mut trace = Vec::new();
        record_eval(&mut trace, 1, &first);
        trace.push(TraceEvent::Incumbent { alpha: first.alpha, ub: first.g_value });
        Self {
            ub: first.g_value,
            alpha_star: first.alpha,
            best: first,
            k: 1,
            pruned_lb: f64::INFINITY,
            trace,
            active: BinaryHeap::new(),
            next_seq: 0,
        }
    }

    fn evaluate(&mut self, problem: &ProblemInstance, alpha: f64, tol: f64) -> Result<Arc<GEvaluation>> {
        let e = Arc::new(eval_g(problem, alpha, tol)?);
        self.k += 1;
        record_eval(&mut self.trace, self.k, &e);
        if e.g_value < self.ub {
            self.ub = e.g_value;
            self.alpha_star = e.alpha;
            self.best = Arc::clone(&e);
            self.trace.push(TraceEvent::Incumbent { alpha: e.alpha, ub: e.g_value });
        }
        Ok(e)
    }

    /// Queue the node if it can still improve on the incumbent by more than ε.
    fn offer(&mut self, node: IntervalNode, epsilon: f64) {
        if node.lb < self.ub - epsilon && !node.is_exhausted() {
            self.trace.push(TraceEvent::NodeCreated {
                alpha_lo: node.alpha_lo,
                alpha_hi: node.alpha_hi,
                lb: node.lb,
                split_point: node.split_point,
            });
            self.active.push(Queued { seq: self.next_seq, node });
            self.next_seq += 1;
        } else {
            self.prune(&node);
        }
    }

    fn prune(&mut self, node: &IntervalNode) {
        self.pruned_lb = self.pruned_lb.min(node.lb);
        self.trace.push(TraceEvent::NodePruned {
            alpha_lo: node.alpha_lo,
            alpha_hi: node.alpha_hi,
            lb: node.lb,
            ub: self.ub,
        });
    }

    /// Smallest `lb` in the active set.
    pub fn lb_star(&self) -> Option<f64> {
        self.active.peek().map(|q| q.node.lb)
    }

    /// Lower bound on the minimum of `G` over the searched interval.
    fn certified_lower(&self) -> f64 {
        let active = self.active.iter().map(|q| q.node.lb).fold(f64::INFINITY, f64::min);
        self.ub.min(self.pruned_lb).min(active)
    }
}

/// Certified global minimization of `G` by branch and bound.
///
/// Evaluates both ends of the search interval, then repeatedly splits the
/// node with the smallest lower bound at the minimizer of its
/// underestimator. Each split costs one evaluation. Children whose bound
/// cannot beat the incumbent by more than ε are discarded, and the run
/// stops when no node remains or the smallest bound reaches `UB − ε`.
pub fn btd_solve(problem: &ProblemInstance, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    let start = Instant::now();
    let eps = config.epsilon;

    if problem.b_is_zero() {
        return Ok(SolveReport::trivial(Algorithm::Btd, problem.n(), start.elapsed()));
    }

    let bounds = bounds::bound_report(problem, eps)?;
    if !bounds.assumption_holds {
        return Err(Error::AssumptionViolated {
            l1: bounds.l1.unwrap_or(f64::NAN),
            l2: bounds.l2.unwrap_or(f64::NAN),
        });
    }
    let (alpha_lo, alpha_hi) = (bounds.alpha_min, bounds.alpha_max.max(bounds.alpha_min));

    let first = Arc::new(eval_g(problem, alpha_lo, config.trs_tol)?);
    let mut state = SearchState::new(first);
    let mut status = SolveStatus::Converged;

    if alpha_hi > alpha_lo * (1.0 + 1e-12) {
        let lo = Arc::clone(&state.best);
        let hi = state.evaluate(problem, alpha_hi, config.trs_tol)?;
        let root = IntervalNode::new(lo, hi)?;
        state.trace.push(TraceEvent::NodeCreated {
            alpha_lo: root.alpha_lo,
            alpha_hi: root.alpha_hi,
            lb: root.lb,
            split_point: root.split_point,
        });

        if root.is_exhausted() {
            // The minimum over the whole interval is an endpoint value.
            status = SolveStatus::Exact;
        } else {
            let mut current = root;
            loop {
                if state.k >= config.max_iterations {
                    status = SolveStatus::IterationCap;
                    state.active.push(Queued { seq: u64::MAX, node: current });
                    break;
                }
                let at = current.split_point.expect("queued nodes have a split point");
                state.trace.push(TraceEvent::NodeSplit {
                    alpha_lo: current.alpha_lo,
                    alpha_hi: current.alpha_hi,
                    lb: current.lb,
                    at,
                });
                let mid = state.evaluate(problem, at, config.trs_tol)?;
                for (lo, hi) in [
                    (Arc::clone(&current.eval_lo), Arc::clone(&mid)),
                    (Arc::clone(&mid), Arc::clone(&current.eval_hi)),
                ] {
                    let mut child = IntervalNode::new(lo, hi)?;
                    // The parent's bound also holds on the sub-interval.
                    child.lb = child.lb.max(current.lb);
                    state.offer(child, eps);
                }

                let next = match state.active.pop() {
                    Some(q) if q.node.lb >= state.ub - eps => {
                        // Every remaining node is at least as large.
                        state.prune(&q.node);
                        while let Some(rest) = state.active.pop() {
                            state.prune(&rest.node);
                        }
                        None
                    }
                    q => q.map(|q| q.node),
                };
                match next {
                    Some(node) => {
                        state.trace.push(TraceEvent::Iteration {
                            k: state.k,
                            ub: state.ub,
                            lb_star: node.lb,
                        });
                        current = node;
                    }
                    None => break,
                }
            }
        }
    } else {
        status = SolveStatus::Exact;
    }

    let mut lower = state.certified_lower();
    let mut alpha_star = state.alpha_star;
    let mut x_star = state.best.x.clone();
    let mut objective = state.ub;

    if bounds.degenerate_case == DegenerateCase::AtbZero {
        // α = 1 lies outside the searched interval; G(1) = ‖b‖² with x = 0.
        let g1 = problem.btb();
        lower = lower.min(g1 - eps);
        if g1 < objective {
            alpha_star = 1.0;
            x_star = nalgebra::DVector::zeros(problem.n());
            objective = g1;
            state.trace.push(TraceEvent::Incumbent { alpha: 1.0, ub: g1 });
        }
    }
    if status == SolveStatus::Exact {
        lower = lower.min(objective);
    }

    Ok(SolveReport {
        algorithm: Algorithm::Btd,
        status,
        alpha_star,
        x_star,
        objective,
        lower_bound: Some(lower),
        certified_gap: Some((objective - lower).max(0.0)),
        iterations: state.k,
        wall_time: start.elapsed(),
        search_interval: (alpha_lo, alpha_hi),
        bound_report: Some(bounds),
        trace: state.trace,
    })
}
