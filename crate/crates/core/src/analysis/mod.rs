//! Closed-form model of the buffer-limit dynamics at TCP congestion events.
//!
//! Between congestion events the limit integrates idle/busy time with gains
//! `a` and `b`; expressing the idle and busy spans through the flows'
//! aggregate AIMD parameters turns the per-event update into an affine
//! recursion
//!
//! ```text
//! E[Q(k+1)] = lambda(k) E[Q(k)] + gamma(k) E[B] T_T
//! ```
//!
//! whose coefficients depend on whether the queue drains after the backoff.
//! This module exposes the coefficients, the stability test, the fixed
//! point, the utilization lower bounds, the trajectory iterator, and an
//! event-level Monte-Carlo oracle of the un-averaged recursion.

use crate::sim::RngStream;

/// The TCP flow population sharing the bottleneck.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowEnsemble {
    /// Round-trip propagation delays `T_i` (seconds).
    pub rtts: Vec<f64>,
    /// Per-flow cwnd increase rates `alpha_i` (packets/s).
    pub alphas: Vec<f64>,
    /// Per-flow backoff factors applied when flow i participates in an event.
    pub betas: Vec<f64>,
}

impl FlowEnsemble {
    /// Standard AIMD flows: one packet per RTT increase (`alpha_i = 1/T_i`)
    /// and a common backoff factor.
    pub fn aimd(rtts: &[f64], beta: f64) -> FlowEnsemble {
        assert!(!rtts.is_empty(), "ensemble needs at least one flow");
        assert!(rtts.iter().all(|t| *t > 0.0), "RTTs must be positive");
        assert!(beta > 0.0 && beta <= 1.0, "backoff factor must be in (0, 1]");
        FlowEnsemble {
            rtts: rtts.to_vec(),
            alphas: rtts.iter().map(|t| 1.0 / t).collect(),
            betas: vec![beta; rtts.len()],
        }
    }

    pub fn n(&self) -> usize {
        self.rtts.len()
    }

    /// Aggregate quantities `(alpha_T, A_T, T_T)`:
    /// total window growth rate (packets/s), total send-rate acceleration
    /// (packets/s^2), and the harmonic mean RTT.
    pub fn derive(&self) -> (f64, f64, f64) {
        let alpha_t: f64 = self.alphas.iter().sum();
        let a_t: f64 = self.alphas.iter().zip(&self.rtts).map(|(a, t)| a / t).sum();
        let inv_sum: f64 = self.rtts.iter().map(|t| 1.0 / t).sum();
        let t_t = self.n() as f64 / inv_sum;
        (alpha_t, a_t, t_t)
    }

    /// Effective aggregate backoff with equal-window weighting
    /// (`w_i/T_i` weights reduce to `1/T_i`).
    pub fn aggregate_beta(&self, participating: &[bool]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.n() {
            let w = 1.0 / self.rtts[i];
            let b = if participating[i] { self.betas[i] } else { 1.0 };
            num += b * w;
            den += w;
        }
        num / den
    }
}

/// Inputs to the congestion-event recursion.
///
/// `delta` is the residual occupancy ratio after a backoff that does not
/// drain the queue, and `p_e` is the probability that the queue drains
/// (reaches the idle threshold) after an event; both enter the averaged
/// coefficients directly rather than being derived internally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Limit increase gain (packets/s of idle time).
    pub a: f64,
    /// Limit decrease gain (packets/s of busy time).
    pub b: f64,
    /// Mean service rate E[B] (packets/s).
    pub service_rate: f64,
    pub alpha_t: f64,
    pub a_t: f64,
    pub t_t: f64,
    /// Effective aggregate backoff factor E[beta_T].
    pub beta_t: f64,
    pub delta: f64,
    pub p_e: f64,
}

impl ModelParams {
    pub fn from_ensemble(
        ens: &FlowEnsemble,
        a: f64,
        b: f64,
        service_rate: f64,
        p_e: f64,
        delta: f64,
    ) -> ModelParams {
        let (alpha_t, a_t, t_t) = ens.derive();
        let all = vec![true; ens.n()];
        ModelParams {
            a,
            b,
            service_rate,
            alpha_t,
            a_t,
            t_t,
            beta_t: ens.aggregate_beta(&all),
            delta,
            p_e,
        }
    }

    /// `alpha_T / (A_T T_T)`, which lies in `[1/n, 1]` for AIMD flows and
    /// equals 1 when RTTs are identical.
    pub fn rtt_ratio(&self) -> f64 {
        self.alpha_t / (self.a_t * self.t_t)
    }
}

/// Per-event recursion coefficients `(lambda_e, lambda_f, gamma_e)`:
/// the queue-drains branch multiplier and offset, and the queue-stays-busy
/// branch multiplier.
pub fn lambda_gamma(mp: &ModelParams) -> (f64, f64, f64) {
    let r = mp.rtt_ratio();
    let den = mp.alpha_t + mp.b;
    let lambda_e = (mp.alpha_t - mp.a * mp.beta_t * r) / den;
    let lambda_f = (mp.alpha_t + mp.b * mp.delta) / den;
    let gamma_e = mp.a * (1.0 - mp.beta_t) / den * r;
    (lambda_e, lambda_f, gamma_e)
}

/// Stability assessment of the limit recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    /// Sufficient condition `a < 2 alpha_T + b` holds.
    pub stable: bool,
    /// `2 alpha_T + b - a` in packets/s; positive means stable.
    pub margin: f64,
    /// The operational rule of thumb `a < 10 + b`, which assumes
    /// `alpha_T >= 5` (at least one flow with RTT at most 200 ms).
    pub practical: bool,
}

pub fn is_stable(mp: &ModelParams) -> StabilityVerdict {
    let margin = 2.0 * mp.alpha_t + mp.b - mp.a;
    StabilityVerdict { stable: mp.a < 2.0 * mp.alpha_t + mp.b, margin, practical: mp.a < 10.0 + mp.b }
}

/// Limit of `E[Q(k)]` for stable dynamics in the identical-RTT,
/// drains-after-backoff regime:
/// `(1 - beta_T) / (b/a + beta_T) * E[B] * T_T`.
/// Reduces to the bandwidth-delay product `E[B] T_T` when `b/a = 0` and
/// `beta_T = 1/2`.
pub fn fixed_point(mp: &ModelParams) -> Result<f64, String> {
    let den = mp.b / mp.a + mp.beta_t;
    if den <= 0.0 {
        return Err(format!("fixed point undefined: b/a + beta_T = {den}"));
    }
    Ok((1.0 - mp.beta_t) / den * mp.service_rate * mp.t_t)
}

/// Steady-state utilization lower bounds `(tight, loose)`:
/// `1/(1 + (b/a) alpha_T/(A_T T_T)) >= 1/(1 + b/a)`.
pub fn utilization_bounds(mp: &ModelParams) -> (f64, f64) {
    let ratio = mp.b / mp.a;
    let tight = 1.0 / (1.0 + ratio * mp.rtt_ratio());
    let loose = 1.0 / (1.0 + ratio);
    (tight, loose)
}

/// Iterate the averaged recursion from `q0` for `k_max` events, clamping at
/// zero. Returns `k_max + 1` values including the initial point.
pub fn recursion_trajectory(mp: &ModelParams, q0: f64, k_max: usize) -> Vec<f64> {
    let (lambda_e, lambda_f, gamma_e) = lambda_gamma(mp);
    let lambda = mp.p_e * lambda_e + (1.0 - mp.p_e) * lambda_f;
    let gamma = mp.p_e * gamma_e;
    let forcing = gamma * mp.service_rate * mp.t_t;
    let mut out = Vec::with_capacity(k_max + 1);
    let mut q = q0.max(0.0);
    out.push(q);
    for _ in 0..k_max {
        q = (lambda * q + forcing).max(0.0);
        out.push(q);
    }
    out
}

/// One sample path of the un-averaged, event-level recursion, plus the
/// empirical branch statistics needed to parameterize the averaged model.
#[derive(Debug, Clone)]
pub struct OraclePath {
    /// `Q(0..=k_max)`.
    pub q: Vec<f64>,
    /// Fraction of events after which the queue drained.
    pub p_e_hat: f64,
    /// Mean residual ratio `delta` over non-draining events (0 if none).
    pub delta_hat: f64,
}

/// Event-level Monte-Carlo oracle for [`recursion_trajectory`].
///
/// Per event each flow independently participates in the backoff with
/// probability `participation` (at least one participant per event); the
/// idle time is clipped at zero when the queue does not drain, and the
/// residual occupancy follows the fluid window balance
/// `q = beta_T (E[B] T_T + Q) - E[B] T_T`.
pub fn epoch_oracle(
    ens: &FlowEnsemble,
    mp: &ModelParams,
    q0: f64,
    k_max: usize,
    participation: f64,
    rng: &mut RngStream,
) -> OraclePath {
    let (alpha_t, a_t, t_t) = ens.derive();
    let eb = mp.service_rate;
    let bdp = eb * t_t;
    let mut q = q0.max(0.0);
    let mut path = Vec::with_capacity(k_max + 1);
    path.push(q);
    let mut empties = 0u64;
    let mut delta_sum = 0.0;
    let mut busy_events = 0u64;
    let mut who = vec![true; ens.n()];
    for _ in 0..k_max {
        loop {
            let mut any = false;
            for w in who.iter_mut() {
                *w = rng.chance(participation) || participation >= 1.0;
                any |= *w;
            }
            if any {
                break;
            }
        }
        let beta_t = ens.aggregate_beta(&who);
        let t_i_raw = ((1.0 - beta_t) * eb - beta_t * q / t_t) / a_t;
        if t_i_raw > 0.0 {
            // Queue drains: idle time accrues, busy time spans the refill.
            empties += 1;
            q = (alpha_t * (q + mp.a * t_i_raw) / (alpha_t + mp.b)).max(0.0);
        } else {
            let resid = (beta_t * (bdp + q) - bdp).max(0.0);
            busy_events += 1;
            delta_sum += if q > 0.0 { resid / q } else { 0.0 };
            q = ((alpha_t * q + mp.b * resid) / (alpha_t + mp.b)).max(0.0);
        }
        path.push(q);
    }
    let events = (empties + busy_events).max(1);
    OraclePath {
        q: path,
        p_e_hat: empties as f64 / events as f64,
        delta_hat: if busy_events > 0 { delta_sum / busy_events as f64 } else { 0.0 },
    }
}

#[cfg(test)]
mod tests;
