//! Busy-period sampling by discrete-event simulation.
//!
//! Each sample starts with one arrival to an empty queue and runs until
//! the system drains. Rates may be piecewise constant in time; within a
//! segment all clocks are exponential, so capping a drawn event at the
//! next rate change and redrawing there is exact.

use rayon::prelude::*;

use super::{QueueError, QueueParams};
use crate::rng::replication_rng;
use rand::Rng;
use rand_distr::{Distribution, Exp};

/// Busy periods sampled from one parameter set.
///
/// `durations`, `customers_served`, `customers_reneged` and `work_served`
/// are aligned per completed sample; runs that hit `max_duration` are only
/// counted in `truncated_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct BusyPeriodSample {
    pub durations: Vec<f64>,
    pub customers_served: Vec<u64>,
    pub customers_reneged: Vec<u64>,
    pub work_served: Vec<f64>,
    pub truncated_count: u64,
}

enum Outcome {
    Completed {
        duration: f64,
        served: u64,
        reneged: u64,
        work: f64,
    },
    Truncated,
}

/// Draws `n_samples` independent busy periods.
///
/// Sample `i` runs on its own RNG stream derived from `seed`, so results
/// are byte-identical across thread schedules. Without `max_duration` the
/// queue must be stable (ρ = λ·E[Y] < 1, peak λ for state-dependent
/// arrivals); with it, unstable queues are allowed and overlong samples
/// land in `truncated_count`.
pub fn sample_busy_periods(
    params: &QueueParams,
    n_samples: usize,
    seed: u64,
    max_duration: Option<f64>,
) -> Result<BusyPeriodSample, QueueError> {
    params.validate()?;
    if n_samples == 0 {
        return Err(QueueError::NoSamples);
    }
    let cap = match max_duration {
        Some(d) => {
            if !(d > 0.0 && d.is_finite()) {
                return Err(QueueError::BadConfig {
                    reason: "max_duration must be positive and finite",
                });
            }
            d
        }
        None => {
            let rho = params.utilization().unwrap_or(f64::INFINITY);
            if rho >= 1.0 {
                return Err(QueueError::UnstableWithoutCap { rho });
            }
            f64::INFINITY
        }
    };

    let outcomes: Vec<Outcome> = (0..n_samples)
        .into_par_iter()
        .map(|i| simulate_one(params, &mut replication_rng(seed, i as u64), cap))
        .collect();

    let mut sample = BusyPeriodSample {
        durations: Vec::new(),
        customers_served: Vec::new(),
        customers_reneged: Vec::new(),
        work_served: Vec::new(),
        truncated_count: 0,
    };
    for outcome in outcomes {
        match outcome {
            Outcome::Completed {
                duration,
                served,
                reneged,
                work,
            } => {
                sample.durations.push(duration);
                sample.customers_served.push(served);
                sample.customers_reneged.push(reneged);
                sample.work_served.push(work);
            }
            Outcome::Truncated => sample.truncated_count += 1,
        }
    }
    Ok(sample)
}

fn simulate_one<R: Rng>(params: &QueueParams, rng: &mut R, cap: f64) -> Outcome {
    let mut t = 0.0f64;
    let mut waiting = 0usize;
    let mut served = 0u64;
    let mut reneged = 0u64;

    // The server never idles inside a busy period, so completion times are
    // the running sum of drawn services; `work` folds the same sum.
    let first = params.service.draw(rng);
    let mut work = first;
    let mut completion = first;
    if completion > cap {
        return Outcome::Truncated;
    }

    loop {
        let in_system = waiting + 1;
        let lambda = params.arrival.rate_at(t, in_system);
        let renege_rate = match &params.reneging {
            Some(f) if waiting > 0 => waiting as f64 * f.rate_at(t, in_system),
            _ => 0.0,
        };
        let segment_end = [
            params.arrival.next_change_after(t),
            params.reneging.as_ref().and_then(|f| f.next_change_after(t)),
        ]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min);

        let t_arrival = if lambda > 0.0 {
            t + Exp::new(lambda).expect("validated").sample(rng)
        } else {
            f64::INFINITY
        };
        let t_renege = if renege_rate > 0.0 {
            t + Exp::new(renege_rate).expect("validated").sample(rng)
        } else {
            f64::INFINITY
        };

        // Departures win exact ties against arrivals.
        if completion <= t_arrival.min(t_renege).min(segment_end) {
            t = completion;
            served += 1;
            if waiting == 0 {
                debug_assert!(t == work, "busy period must equal served work");
                return Outcome::Completed {
                    duration: t,
                    served,
                    reneged,
                    work,
                };
            }
            waiting -= 1;
            let y = params.service.draw(rng);
            work += y;
            completion = t + y;
            if completion > cap {
                return Outcome::Truncated;
            }
        } else if t_arrival <= t_renege && t_arrival <= segment_end {
            t = t_arrival;
            waiting += 1;
        } else if t_renege <= segment_end {
            t = t_renege;
            waiting -= 1;
            reneged += 1;
        } else {
            // A rate changed; memorylessness makes redrawing from here exact.
            t = segment_end;
        }
    }
}
