//! Distance to bit-error probability for the non-coherent energy-detector receiver.

use std::f64::consts::{PI, SQRT_2};

use libm::erfc;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, ModelError, Result};
use crate::frame::PhyMode;

/// Log-distance body-area path loss plus receiver noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    /// Path-loss slope, dB per decade of distance in millimetres.
    pub a: f64,
    /// Path-loss intercept, dB.
    pub b: f64,
    /// Shadowing standard deviation, dB.
    pub sigma: f64,
    /// Thermal noise density, dBm/Hz.
    pub noise_density: f64,
    /// Receiver noise figure, dB.
    pub noise_figure: f64,
    /// Implementation margin, dB.
    pub impl_margin: f64,
    /// Receiver equivalent noise bandwidth, Hz.
    pub w_rx: f64,
    /// Apply the noise figure and implementation margin as SNR penalties
    /// folded into the channel gain. When false both are ignored.
    pub apply_rx_penalties: bool,
}

impl Default for ChannelParams {
    /// Hospital-room values with the standard's receiver figures.
    fn default() -> Self {
        ChannelParams {
            a: 19.2,
            b: 3.38,
            sigma: 4.40,
            noise_density: -174.0,
            noise_figure: 10.0,
            impl_margin: 5.0,
            w_rx: 499.2e6,
            apply_rx_penalties: true,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("channel.sigma", self.sigma)?;
        ensure_positive("channel.w_rx", self.w_rx)?;
        for (name, v) in [
            ("channel.a", self.a),
            ("channel.b", self.b),
            ("channel.noise_density", self.noise_density),
            ("channel.noise_figure", self.noise_figure),
            ("channel.impl_margin", self.impl_margin),
        ] {
            if !v.is_finite() {
                return Err(ModelError::Domain {
                    name,
                    value: v,
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }

    /// One-sided noise power spectral density in W/Hz (= Joules).
    pub fn noise_psd(&self) -> f64 {
        10f64.powf((self.noise_density - 30.0) / 10.0)
    }

    fn penalty_db(&self) -> f64 {
        if self.apply_rx_penalties {
            self.noise_figure + self.impl_margin
        } else {
            0.0
        }
    }
}

/// Path loss in dB at `distance` metres with shadowing sample `chi` (dB).
///
/// The model is defined on distance in millimetres: `a log10(d_mm) + b + chi`.
pub fn path_loss_db(distance: f64, params: &ChannelParams, chi: f64) -> Result<f64> {
    ensure_positive("distance", distance)?;
    Ok(params.a * (distance * 1e3).log10() + params.b + chi)
}

/// Per-distance inputs to the bit-error formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub distance: f64,
    pub path_loss_db: f64,
    /// Linear power gain including the receiver penalties.
    pub h: f64,
    /// Transmit energy per pulse, J.
    pub eps_p: f64,
    /// Noise PSD, J.
    pub n0: f64,
    /// Pulse duration, s.
    pub t_p: f64,
    pub w_rx: f64,
}

impl LinkBudget {
    /// Received bit-energy to noise ratio. A bit carries `n_cpb` pulses.
    pub fn ebn0(&self, n_cpb: u32) -> f64 {
        self.h * f64::from(n_cpb) * self.eps_p / self.n0
    }

    /// Energy-detector integration window, one burst long.
    pub fn t_int(&self, n_cpb: u32) -> f64 {
        f64::from(n_cpb) * self.t_p
    }

    pub fn bit_error_prob(&self, mode: &PhyMode) -> f64 {
        bit_error_prob(self, mode)
    }
}

pub fn link_budget(
    distance: f64,
    eps_p: f64,
    params: &ChannelParams,
    chi: f64,
    t_p: f64,
) -> Result<LinkBudget> {
    ensure_positive("energy.eps_p", eps_p)?;
    let path_loss_db = path_loss_db(distance, params, chi)?;
    Ok(LinkBudget {
        distance,
        path_loss_db,
        h: 10f64.powf(-(path_loss_db + params.penalty_db()) / 10.0),
        eps_p,
        n0: params.noise_psd(),
        t_p,
        w_rx: params.w_rx,
    })
}

/// Bit-error probability of on-off keying with an energy detector.
///
/// The noise term is `n_cpb * t_int * w_rx` with `t_int = n_cpb * t_p`, so it
/// grows with the square of the burst length. This caps the processing gain
/// once the per-pulse SNR falls below `n_cpb`.
pub fn bit_error_prob(lb: &LinkBudget, mode: &PhyMode) -> f64 {
    bit_error_prob_from_snr(
        lb.ebn0(mode.n_cpb),
        f64::from(mode.n_cpb) * lb.t_int(mode.n_cpb) * lb.w_rx,
    )
}

/// `Q(sqrt(snr^2 / (2 (snr + noise_dof))))`.
pub fn bit_error_prob_from_snr(ebn0: f64, noise_dof: f64) -> f64 {
    q_function(detector_argument(ebn0, noise_dof))
}

/// Natural log of [`bit_error_prob_from_snr`], finite where the probability underflows.
pub fn ln_bit_error_prob_from_snr(ebn0: f64, noise_dof: f64) -> f64 {
    ln_q_function(detector_argument(ebn0, noise_dof))
}

fn detector_argument(ebn0: f64, noise_dof: f64) -> f64 {
    if ebn0 <= 0.0 {
        return 0.0;
    }
    if ebn0.is_infinite() {
        return f64::INFINITY;
    }
    (0.5 * ebn0 * ebn0 / (ebn0 + noise_dof)).sqrt()
}

/// Above this argument `Q` is evaluated through its asymptotic expansion in the log domain.
const LOG_DOMAIN_THRESHOLD: f64 = 30.0;

/// Gaussian tail probability `P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    if x > LOG_DOMAIN_THRESHOLD {
        ln_q_function(x).exp()
    } else {
        0.5 * erfc(x / SQRT_2)
    }
}

/// `ln Q(x)`.
pub fn ln_q_function(x: f64) -> f64 {
    if x == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if x <= LOG_DOMAIN_THRESHOLD {
        return q_function(x).ln();
    }
    // Q(x) = phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...)
    let r = 1.0 / (x * x);
    let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    -0.5 * x * x - x.ln() - 0.5 * (2.0 * PI).ln() + series.ln()
}

/// Seeded log-normal shadowing draws, one per sweep index.
///
/// Each index gets its own ChaCha stream, so the draw for a distance does not
/// depend on evaluation order.
#[derive(Debug, Clone)]
pub struct ShadowingSampler {
    seed: u64,
    normal: Normal<f64>,
}

impl ShadowingSampler {
    pub fn new(seed: u64, sigma: f64) -> Result<Self> {
        ensure_non_negative("channel.sigma", sigma)?;
        let normal = Normal::new(0.0, sigma).map_err(|_| ModelError::Domain {
            name: "channel.sigma",
            value: sigma,
            reason: "not a valid standard deviation",
        })?;
        Ok(ShadowingSampler { seed, normal })
    }

    /// Shadowing sample in dB for sweep point `index`.
    pub fn sample(&self, index: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        self.normal.sample(&mut rng)
    }
}
