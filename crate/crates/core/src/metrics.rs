//! Energy efficiency (bits/J) and throughput (bits/s) of one link and PHY mode.

use serde::{Deserialize, Serialize};

use crate::channel::{link_budget, ChannelParams, LinkBudget};
use crate::energy::{EnergyBreakdown, EnergyParams};
use crate::error::{ensure_positive, ModelError, Result};
use crate::frame::{BchCode, FrameConstants, PhyMode};
use crate::reliability::{psdu_success, BitErrorProfile, LinkReliability, ReliabilityMode};

/// Aggregate rate requirement: `n_s` nodes each asking for `r0` bits/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QosSpec {
    pub r0: f64,
    pub n_s: u32,
}

impl Default for QosSpec {
    fn default() -> Self {
        QosSpec { r0: 15e3, n_s: 24 }
    }
}

impl QosSpec {
    /// A hub serves at most this many nodes.
    pub const MAX_NODES: u32 = 64;

    pub fn validate(&self) -> Result<()> {
        ensure_positive("qos.r0", self.r0)?;
        if !(1..=Self::MAX_NODES).contains(&self.n_s) {
            return Err(ModelError::Domain {
                name: "qos.n_s",
                value: f64::from(self.n_s),
                reason: "must be between 1 and 64",
            });
        }
        Ok(())
    }

    /// `r0 * n_s`.
    pub fn required_rate(&self) -> f64 {
        self.r0 * f64::from(self.n_s)
    }
}

/// Every fixed parameter of the link model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemModel {
    pub channel: ChannelParams,
    pub energy: EnergyParams,
    pub frame: FrameConstants,
    pub psdu_code: BchCode,
    pub phr_code: BchCode,
    pub reliability: ReliabilityMode,
}

impl Default for SystemModel {
    fn default() -> Self {
        SystemModel::new(ChannelParams::default(), EnergyParams::default())
    }
}

impl SystemModel {
    pub fn new(channel: ChannelParams, energy: EnergyParams) -> Self {
        SystemModel {
            channel,
            energy,
            frame: FrameConstants::default(),
            psdu_code: BchCode::PSDU_DEFAULT,
            phr_code: BchCode::PHR_DEFAULT,
            reliability: ReliabilityMode::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.energy.validate()?;
        self.frame.validate()?;
        BchCode::new(self.psdu_code.n, self.psdu_code.k, self.psdu_code.t)?;
        BchCode::new(self.phr_code.n, self.phr_code.k, self.phr_code.t)?;
        Ok(())
    }

    pub fn link(&self, distance: f64, chi: f64) -> Result<LinkBudget> {
        link_budget(
            distance,
            self.energy.eps_p,
            &self.channel,
            chi,
            self.frame.t_p,
        )
    }

    pub fn mode_model(&self, lb: &LinkBudget, mode: PhyMode) -> Result<ModeModel> {
        let profile = BitErrorProfile::for_link(lb, &mode, &self.frame, self.reliability)?;
        Ok(self.mode_model_with_profile(&profile, mode))
    }

    /// Evaluator for an explicit bit-error profile, bypassing the channel.
    pub fn mode_model_with_profile(&self, profile: &BitErrorProfile, mode: PhyMode) -> ModeModel {
        ModeModel {
            mode,
            reliability: LinkReliability::new(profile, &self.frame, self.psdu_code, self.phr_code),
            energy: EnergyBreakdown::new(&mode, &self.frame, &self.energy),
            t_overhead: self.frame.overhead_time(),
        }
    }

    /// One evaluator per PHY mode, ascending in `n_cpb`.
    pub fn mode_models(&self, distance: f64, chi: f64) -> Result<Vec<ModeModel>> {
        let lb = self.link(distance, chi)?;
        PhyMode::all()
            .into_iter()
            .map(|m| self.mode_model(&lb, m))
            .collect()
    }

    pub fn evaluate(&self, op: &OperatingPoint) -> Result<Metrics> {
        let model = self.mode_model(&self.link(op.distance, 0.0)?, op.mode)?;
        Ok(model.metrics(op.n_t))
    }
}

/// A PSDU size and PHY mode at a given distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub n_t: u32,
    pub mode: PhyMode,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub eta: f64,
    pub rate: f64,
    pub p_ppdu: f64,
}

/// Objective functions of one (link, mode) pair.
///
/// The integer-argument methods use `ceil(n_t / n)` codewords. The
/// `_continuous` variants use `n_t / n`; the two agree on multiples of `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeModel {
    pub mode: PhyMode,
    pub reliability: LinkReliability,
    pub energy: EnergyBreakdown,
    /// SHR + PHR airtime, s.
    pub t_overhead: f64,
}

impl ModeModel {
    pub fn code_len(&self) -> u32 {
        self.reliability.code.n
    }

    fn delivered_bits(&self, n_t: f64, codewords: f64) -> f64 {
        n_t * self.reliability.header_success() * psdu_success(self.reliability.ln_p_cw, codewords)
    }

    pub fn p_ppdu(&self, n_t: u32) -> f64 {
        self.reliability.frame(n_t).p_ppdu
    }

    pub fn eta(&self, n_t: u32) -> f64 {
        let codewords = f64::from(n_t.div_ceil(self.code_len()));
        self.delivered_bits(f64::from(n_t), codewords) / self.energy.total(f64::from(n_t))
    }

    pub fn rate(&self, n_t: u32) -> f64 {
        let codewords = f64::from(n_t.div_ceil(self.code_len()));
        self.delivered_bits(f64::from(n_t), codewords) / self.airtime(f64::from(n_t))
    }

    pub fn metrics(&self, n_t: u32) -> Metrics {
        Metrics {
            eta: self.eta(n_t),
            rate: self.rate(n_t),
            p_ppdu: self.p_ppdu(n_t),
        }
    }

    pub fn airtime(&self, n_t: f64) -> f64 {
        self.t_overhead + n_t * self.mode.t_sym
    }

    pub fn eta_continuous(&self, n_t: f64) -> f64 {
        self.delivered_bits(n_t, n_t / f64::from(self.code_len())) / self.energy.total(n_t)
    }

    pub fn rate_continuous(&self, n_t: f64) -> f64 {
        self.delivered_bits(n_t, n_t / f64::from(self.code_len())) / self.airtime(n_t)
    }

    /// `d eta / d n_t` of the continuous form.
    pub fn eta_gradient(&self, n_t: f64) -> f64 {
        ratio_gradient(self, n_t, self.energy.eps_b, self.energy.fixed())
    }

    /// `d R / d n_t` of the continuous form.
    pub fn rate_gradient(&self, n_t: f64) -> f64 {
        ratio_gradient(self, n_t, self.mode.t_sym, self.t_overhead)
    }
}

/// Derivative of `n A p^(n/k) / (per_bit n + fixed)`:
/// `A p^(n/k) beta / gamma^2` with
/// `beta = n^2 per_bit ln p / k + n fixed ln p / k + fixed`.
fn ratio_gradient(m: &ModeModel, n_t: f64, per_bit: f64, fixed: f64) -> f64 {
    let k = f64::from(m.code_len());
    let ln_p = m.reliability.ln_p_cw;
    let a = m.reliability.header_success() * psdu_success(ln_p, n_t / k);
    let beta = stationarity_polynomial(n_t, per_bit, fixed, ln_p, m.code_len());
    let gamma = per_bit * n_t + fixed;
    a * beta / (gamma * gamma)
}

/// The numerator polynomial whose positive root is the stationary frame size.
pub fn stationarity_polynomial(n_t: f64, per_bit: f64, fixed: f64, ln_p_cw: f64, n: u32) -> f64 {
    let s = ln_p_cw / f64::from(n);
    n_t * n_t * per_bit * s + n_t * fixed * s + fixed
}

/// Energy efficiency of a frame of `n_t` bits on `deps`.
pub fn energy_efficiency(n_t: u32, deps: &ModeModel) -> f64 {
    deps.eta(n_t)
}

/// Throughput of a frame of `n_t` bits on `deps`.
pub fn throughput(n_t: u32, deps: &ModeModel) -> f64 {
    deps.rate(n_t)
}
