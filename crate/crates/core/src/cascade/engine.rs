//! The cascade sweep itself.
//!
//! A cascade is instantaneous relaxation: an initiating sale commits a
//! log-price drop, every threshold the falling price enters is consumed
//! in position order, same-state switches extend the committed drop and
//! anti switches cancel committed-but-unswept drop. The committed front
//! is a pure running sum of jumps, so fields with equal weights produce
//! exact lattice values, which the queue comparisons rely on.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use super::field::ThresholdField;
use super::CascadeError;
use crate::rng::replication_rng;

/// Who switched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentId {
    Initiator,
    /// Index into the field's explicit entries.
    Field(usize),
    /// k-th threshold drawn from the generator, in position order.
    Generated(usize),
}

/// One switch in consumption order. `jump` is the realized signed move:
/// positive for same-state switches, and for anti switches the (possibly
/// capped) amount actually cancelled, negated. The uncancelled excess of
/// anti jumps accumulates in [`CascadeOutcome::terminal_bounce`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switch {
    pub agent: AgentId,
    pub jump: f64,
}

/// Result of one cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutcome {
    /// Final committed log-price drop; equals the signed sum of `switches`.
    pub total_drop: f64,
    /// Number of switches including the initiator.
    pub num_switches: usize,
    pub switches: Vec<Switch>,
    /// Anti jumps that found nothing left to cancel.
    pub terminal_bounce: f64,
    /// True when the switch cap ended the run before natural termination.
    pub truncated: bool,
}

/// Sweeps one cascade started by a +1 agent of weight `initiator_weight`.
///
/// The committed front F starts at the initiator's jump. Thresholds are
/// consumed in ascending position while position ≤ F: same-state entries
/// add their jump to F; anti entries pull F back by theirs, but never
/// below the deepest point already swept nor into the initiator's own
/// jump (a trade already made cannot be unmade). The run ends when no
/// unconsumed threshold remains at or before F, and F is the total drop.
pub fn run_cascade<R: Rng + ?Sized>(
    field: &ThresholdField,
    initiator_weight: f64,
    max_switches: usize,
    rng: &mut R,
) -> Result<CascadeOutcome, CascadeError> {
    field.validate()?;
    if !(initiator_weight > 0.0 && initiator_weight.is_finite()) {
        return Err(CascadeError::BadField {
            reason: "initiator weight must be positive and finite",
        });
    }
    if max_switches == 0 {
        return Err(CascadeError::BadField {
            reason: "max_switches must be at least 1",
        });
    }

    let scale = field.jump_scale();
    let initiator_jump = scale * initiator_weight;
    let mut committed = initiator_jump;
    let mut bounce = 0.0f64;
    let mut switches = vec![Switch {
        agent: AgentId::Initiator,
        jump: initiator_jump,
    }];
    let mut truncated = false;

    let mut explicit = field.entries.iter().enumerate().peekable();
    // Lazily drawn generator stream; `pending` holds the next undrawn-from
    // point so nothing is ever discarded or redrawn.
    let mut pending: Option<(f64, i8, f64)> = None;
    let mut gen_pos = 0.0f64;
    let mut gen_count = 0usize;

    loop {
        if pending.is_none() {
            if let Some(g) = &field.generator {
                gen_pos += Exp::new(g.poisson_rate).expect("validated").sample(rng);
                let state = if rng.gen::<f64>() < g.anti_fraction { -1 } else { 1 };
                let weight = g.weight_dist.draw(rng);
                pending = Some((gen_pos, state, weight));
            }
        }
        let explicit_pos = explicit
            .peek()
            .map_or(f64::INFINITY, |(_, e)| e.position);
        let generated_pos = pending.map_or(f64::INFINITY, |(p, _, _)| p);
        if explicit_pos.min(generated_pos) > committed {
            break;
        }
        // Explicit entries win ties against generated ones.
        let (position, state, weight, agent) = if explicit_pos <= generated_pos {
            let (i, e) = explicit.next().expect("peeked");
            (e.position, e.state, e.weight, AgentId::Field(i))
        } else {
            let (p, s, w) = pending.take().expect("checked");
            let agent = AgentId::Generated(gen_count);
            gen_count += 1;
            (p, s, w, agent)
        };

        let jump = scale * weight;
        if state == 1 {
            committed += jump;
            switches.push(Switch { agent, jump });
        } else {
            // Only drop that is committed but not yet swept can cancel;
            // the floor is the deeper of the sweep position and the
            // initiator's jump.
            let floor = position.max(initiator_jump);
            let cancel = jump.min(committed - floor).max(0.0);
            committed -= cancel;
            bounce += jump - cancel;
            switches.push(Switch {
                agent,
                jump: -cancel,
            });
        }
        if switches.len() >= max_switches {
            truncated = true;
            break;
        }
    }

    Ok(CascadeOutcome {
        total_drop: committed,
        num_switches: switches.len(),
        switches,
        terminal_bounce: bounce,
        truncated,
    })
}

/// Monte Carlo cascade outcomes with the (bulky) switch sequences dropped.
///
/// Truncated runs are only counted; the aligned vectors hold completed
/// cascades.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSample {
    pub drops: Vec<f64>,
    pub num_switches: Vec<u64>,
    pub bounces: Vec<f64>,
    pub truncated_count: u64,
}

/// Runs `n_samples` independent cascades, one RNG stream per sample.
pub fn sample_cascades(
    field: &ThresholdField,
    initiator_weight: f64,
    n_samples: usize,
    seed: u64,
    max_switches: usize,
) -> Result<CascadeSample, CascadeError> {
    field.validate()?;
    if n_samples == 0 {
        return Err(CascadeError::NoSamples);
    }
    let outcomes: Vec<(f64, u64, f64, bool)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = replication_rng(seed, i as u64);
            let out = run_cascade(field, initiator_weight, max_switches, &mut rng)
                .expect("field validated before sampling");
            (
                out.total_drop,
                out.num_switches as u64,
                out.terminal_bounce,
                out.truncated,
            )
        })
        .collect();

    let mut sample = CascadeSample {
        drops: Vec::new(),
        num_switches: Vec::new(),
        bounces: Vec::new(),
        truncated_count: 0,
    };
    for (drop, switches, bounce, truncated) in outcomes {
        if truncated {
            sample.truncated_count += 1;
        } else {
            sample.drops.push(drop);
            sample.num_switches.push(switches);
            sample.bounces.push(bounce);
        }
    }
    Ok(sample)
}
