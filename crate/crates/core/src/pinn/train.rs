//! Training loop: repeated residual-gradient steps on the collocation points.

use std::io::Write;

use rand::seq::index::sample;

use super::grid::CollocationGrid;
use super::loss::{loss, loss_and_gradient, LossMetrics};
use super::optim::{Optimizer, OptimizerKind};
use super::trial::TrialFunction;
use crate::error::{Error, Result};
use crate::model::PdeProblem;
use crate::neural::NetworkParams;
use crate::simulate::rng::{derive_seed, path_stream};

/// Points used for each gradient step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Batch {
    /// Every training point, every step.
    #[default]
    Full,
    /// A fresh uniform sample without replacement each step.
    MiniBatch(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub iterations: usize,
    pub batch: Batch,
    pub seed: u64,
    /// Stop once the parameter step norm falls to this value.
    pub convergence_tol: f64,
    pub display_every: usize,
    /// Scale the time derivative by `1/T` as the normalized PDE requires.
    pub include_1_over_t: bool,
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: OptimizerKind::Sgd,
            learning_rate: 1e-3,
            iterations: 10_000,
            batch: Batch::Full,
            seed: 42,
            convergence_tol: 1e-8,
            display_every: 500,
            include_1_over_t: true,
            threads: 1,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid(
                "learning_rate",
                "must be finite and non-negative",
            ));
        }
        if self.iterations == 0 {
            return Err(Error::invalid(
                "iterations",
                "at least one iteration is required",
            ));
        }
        if self.display_every == 0 {
            return Err(Error::invalid("display_every", "must be positive"));
        }
        if let Batch::MiniBatch(0) = self.batch {
            return Err(Error::invalid("batch", "mini-batch size must be positive"));
        }
        Ok(())
    }
}

/// Which subset of the grid a metric row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
    Full,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub step: usize,
    pub split: Split,
    pub metrics: LossMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    IterationLimit,
    Converged,
}

/// Metric history and final parameters of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Ordered by step, then train/test/full.
    pub checkpoints: Vec<Checkpoint>,
    pub params: NetworkParams,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub steps: usize,
}

impl TrainReport {
    /// Checkpoints of one split in step order.
    pub fn series(&self, split: Split) -> Vec<Checkpoint> {
        self.checkpoints
            .iter()
            .filter(|c| c.split == split)
            .copied()
            .collect()
    }

    /// Writes `step,mse,rmse,mae,split` rows.
    pub fn write_metrics_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,mse,rmse,mae,split")?;
        for c in &self.checkpoints {
            writeln!(
                out,
                "{},{:?},{:?},{:?},{}",
                c.step, c.metrics.mse, c.metrics.rmse, c.metrics.mae, c.split
            )?;
        }
        Ok(())
    }
}

fn record(
    out: &mut Vec<Checkpoint>,
    step: usize,
    tf: &TrialFunction,
    pde: &PdeProblem,
    sets: &[(Split, Vec<(f64, f64)>)],
    include_1_over_t: bool,
) {
    for (split, pts) in sets {
        if pts.is_empty() {
            continue;
        }
        out.push(Checkpoint {
            step,
            split: *split,
            metrics: loss(tf, pde, pts, include_1_over_t),
        });
    }
}

/// Trains the network inside `tf` on the grid's training points.
///
/// Metrics for the train, test and full point sets are recorded before the
/// first update, after the first update, every `display_every` steps and at
/// the final step. A non-finite loss aborts the run with
/// [`Error::Diverged`], which carries the history and the last finite
/// parameters.
pub fn train(
    tf: &TrialFunction,
    pde: &PdeProblem,
    grid: &CollocationGrid,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    let train_pts = grid.train_points();
    if train_pts.is_empty() {
        return Err(Error::invalid("grid", "training split is empty"));
    }
    let sets = [
        (Split::Train, train_pts.clone()),
        (Split::Test, grid.test_points()),
        (Split::Full, grid.points.clone()),
    ];
    let pool = if cfg.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| Error::invalid("threads", e.to_string()))?,
        )
    } else {
        None
    };

    let mut current = tf.clone();
    let mut opt = Optimizer::new(cfg.optimizer, cfg.learning_rate, current.params.data.len());
    let mut batch_rng = path_stream(derive_seed(cfg.seed, 0x6261_7463), 0);
    let mut checkpoints = Vec::new();
    record(
        &mut checkpoints,
        0,
        &current,
        pde,
        &sets,
        cfg.include_1_over_t,
    );

    let mut stop_reason = StopReason::IterationLimit;
    let mut steps = 0;
    let mut batch_pts = Vec::new();
    for step in 1..=cfg.iterations {
        let pts: &[(f64, f64)] = match cfg.batch {
            Batch::Full => &train_pts,
            Batch::MiniBatch(size) => {
                let size = size.min(train_pts.len());
                let mut idx = sample(&mut batch_rng, train_pts.len(), size).into_vec();
                idx.sort_unstable();
                batch_pts.clear();
                batch_pts.extend(idx.iter().map(|&i| train_pts[i]));
                &batch_pts
            }
        };
        let (metrics, grad) =
            loss_and_gradient(&current, pde, pts, cfg.include_1_over_t, pool.as_ref());
        if !metrics.loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged {
                step,
                report: Box::new(TrainReport {
                    checkpoints,
                    params: current.params,
                    converged: false,
                    stop_reason: StopReason::IterationLimit,
                    steps: step - 1,
                }),
            });
        }
        let before = current.params.clone();
        let norm = opt.step(&mut current.params.data, &grad);
        if !norm.is_finite() {
            return Err(Error::Diverged {
                step,
                report: Box::new(TrainReport {
                    checkpoints,
                    params: before,
                    converged: false,
                    stop_reason: StopReason::IterationLimit,
                    steps: step - 1,
                }),
            });
        }
        steps = step;
        let converged = norm <= cfg.convergence_tol;
        if step == 1 || step % cfg.display_every == 0 || step == cfg.iterations || converged {
            record(
                &mut checkpoints,
                step,
                &current,
                pde,
                &sets,
                cfg.include_1_over_t,
            );
        }
        if converged {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    Ok(TrainReport {
        checkpoints,
        params: current.params,
        converged: stop_reason == StopReason::Converged,
        stop_reason,
        steps,
    })
}
