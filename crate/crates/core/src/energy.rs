//! Transceiver energy per PPDU exchange.
//!
//! Payload energy is linear in the PSDU length, so it is carried as a
//! per-bit figure. SHR/PHR overhead and radio start-up are fixed costs.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ModelError, Result};
use crate::frame::{FrameConstants, PhyMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyParams {
    /// Transmit energy per pulse, J.
    pub eps_p: f64,
    /// Power of one RAKE finger / correlator, W.
    pub p_cor: f64,
    pub p_adc: f64,
    pub p_lna: f64,
    pub p_vga: f64,
    /// Clock generator and synchronizer, W.
    pub p_syn: f64,
    /// Pulse generator, W.
    pub p_gen: f64,
    /// Start-up time of each radio, s.
    pub t_st: f64,
    /// Number of RAKE fingers.
    pub m_fingers: u32,
    /// 1 for coherent, 0 for non-coherent detection.
    pub rho_r: u8,
    /// 1 for soft, 0 for hard decisions.
    pub rho_c: u8,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            eps_p: 20e-12,
            p_cor: 10.08e-3,
            p_adc: 2.2e-3,
            p_lna: 9.4e-3,
            p_vga: 22e-3,
            p_syn: 30.6e-3,
            p_gen: 2.8e-3,
            t_st: 400e-6,
            m_fingers: 1,
            rho_r: 0,
            rho_c: 0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("energy.eps_p", self.eps_p),
            ("energy.p_cor", self.p_cor),
            ("energy.p_adc", self.p_adc),
            ("energy.p_lna", self.p_lna),
            ("energy.p_vga", self.p_vga),
            ("energy.p_syn", self.p_syn),
            ("energy.p_gen", self.p_gen),
            ("energy.t_st", self.t_st),
        ] {
            ensure_non_negative(name, v)?;
        }
        for (name, v) in [("energy.rho_r", self.rho_r), ("energy.rho_c", self.rho_c)] {
            if v > 1 {
                return Err(ModelError::Domain {
                    name,
                    value: f64::from(v),
                    reason: "must be 0 or 1",
                });
            }
        }
        Ok(())
    }

    /// Receiver power while listening: correlators, optional ADC, LNA, VGA,
    /// and pulse generator plus synchronizer for coherent detection.
    pub fn rx_power(&self) -> f64 {
        f64::from(self.m_fingers) * self.p_cor
            + f64::from(self.rho_c) * self.p_adc
            + self.p_lna
            + self.p_vga
            + f64::from(self.rho_r) * (self.p_gen + self.p_syn)
    }

    /// Every power and the pulse energy multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        EnergyParams {
            eps_p: self.eps_p * factor,
            p_cor: self.p_cor * factor,
            p_adc: self.p_adc * factor,
            p_lna: self.p_lna * factor,
            p_vga: self.p_vga * factor,
            p_syn: self.p_syn * factor,
            p_gen: self.p_gen * factor,
            ..*self
        }
    }
}

/// Transmit plus receive energy per payload bit, J/bit.
pub fn payload_energy_per_bit(mode: &PhyMode, ep: &EnergyParams) -> f64 {
    ep.eps_p * f64::from(mode.n_cpb) + (ep.p_syn + ep.rx_power()) * mode.t_sym
}

/// Transmit plus receive energy of the SHR and PHR, J.
pub fn overhead_energy(consts: &FrameConstants, ep: &EnergyParams) -> f64 {
    let pulses = consts.n_cpb_shr * consts.n_shr + consts.n_cpb_phr * consts.n_phr;
    let airtime = consts.overhead_time();
    let tx = f64::from(pulses) * ep.eps_p + ep.p_syn * airtime;
    let rx = ep.rx_power() * airtime;
    tx + rx
}

/// Start-up energy of transmitter and receiver, `2 p_syn t_st`.
pub fn startup_energy(ep: &EnergyParams) -> f64 {
    2.0 * ep.p_syn * ep.t_st
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub eps_b: f64,
    pub eps_oh: f64,
    pub eps_st: f64,
}

impl EnergyBreakdown {
    pub fn new(mode: &PhyMode, consts: &FrameConstants, ep: &EnergyParams) -> Self {
        EnergyBreakdown {
            eps_b: payload_energy_per_bit(mode, ep),
            eps_oh: overhead_energy(consts, ep),
            eps_st: startup_energy(ep),
        }
    }

    /// Fixed per-frame energy `eps_oh + eps_st`.
    pub fn fixed(&self) -> f64 {
        self.eps_oh + self.eps_st
    }

    pub fn total(&self, n_t: f64) -> f64 {
        n_t * self.eps_b + self.fixed()
    }
}
