//! Shared helpers for the integration tests: a bit-flip frame simulator and
//! randomized model draws.
#![allow(dead_code)]

use cloee::energy::EnergyParams;
use cloee::frame::{BchCode, FrameConstants, PhyMode};
use cloee::metrics::{ModeModel, SystemModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

/// Frames with independent bit flips at rate `p_b`, decoded block by block:
/// a Kasami sequence is detected with at most `rho` errors, a BCH block
/// decodes with at most `t` errors, and the SHR needs the SFD plus any one
/// of the preamble sequences.
pub struct FrameSimulator {
    consts: FrameConstants,
    psdu: BchCode,
    phr: BchCode,
    codewords: u32,
    gaps: Geometric,
}

impl FrameSimulator {
    pub fn new(p_b: f64, n_t: u32, consts: FrameConstants, psdu: BchCode, phr: BchCode) -> Self {
        FrameSimulator {
            consts,
            psdu,
            phr,
            codewords: n_t.div_ceil(psdu.n),
            gaps: Geometric::new(p_b).unwrap(),
        }
    }

    fn frame_ok(&self, rng: &mut ChaCha8Rng) -> bool {
        let k = u64::from(self.consts.kasami_len);
        let preambles = u64::from(self.consts.kasami_count);
        let shr_end = k * (preambles + 1);
        let phr_end = shr_end + u64::from(self.phr.n);
        let end = phr_end + u64::from(self.codewords) * u64::from(self.psdu.n);

        let mut block = u64::MAX;
        let mut errors = 0u32;
        let mut failed_preambles = 0u64;
        let mut pos = 0u64;
        loop {
            pos += self.gaps.sample(rng);
            if pos >= end {
                break;
            }
            let (b, limit) = if pos < shr_end {
                (pos / k, self.consts.rho_sensitivity)
            } else if pos < phr_end {
                (preambles + 1, self.phr.t)
            } else {
                (
                    preambles + 2 + (pos - phr_end) / u64::from(self.psdu.n),
                    self.psdu.t,
                )
            };
            if b != block {
                block = b;
                errors = 0;
            }
            errors += 1;
            if errors == limit + 1 {
                if b < preambles {
                    failed_preambles += 1;
                    if failed_preambles == preambles {
                        return false;
                    }
                } else {
                    return false;
                }
            }
            pos += 1;
        }
        true
    }

    /// Successful frames out of `frames`.
    pub fn run(&self, frames: u64, seed: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..frames).filter(|_| self.frame_ok(&mut rng)).count() as u64
    }
}

/// A random link: distance in [1, 10] m, a random mode, and every energy
/// parameter scaled independently by a factor in [0.5, 2].
pub struct Draw {
    pub distance: f64,
    pub system: SystemModel,
    pub mode: PhyMode,
}

impl Draw {
    pub fn model(&self) -> ModeModel {
        self.system
            .mode_model(&self.system.link(self.distance, 0.0).unwrap(), self.mode)
            .unwrap()
    }
}

pub fn random_draws(count: usize, seed: u64) -> Vec<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut f = || rng.random_range(0.5..2.0);
            let e = EnergyParams::default();
            let energy = EnergyParams {
                eps_p: e.eps_p * f(),
                p_cor: e.p_cor * f(),
                p_adc: e.p_adc * f(),
                p_lna: e.p_lna * f(),
                p_vga: e.p_vga * f(),
                p_syn: e.p_syn * f(),
                p_gen: e.p_gen * f(),
                t_st: e.t_st * f(),
                ..e
            };
            let distance = rng.random_range(1.0..10.0);
            let mode = PhyMode::all()[rng.random_range(0..6)];
            Draw {
                distance,
                system: SystemModel {
                    energy,
                    ..SystemModel::default()
                },
                mode,
            }
        })
        .collect()
}

/// Number of sign changes in the first differences of `values`, ignoring
/// exact ties, and whether the only change (if any) is from rising to falling.
pub fn difference_sign_changes(values: &[f64]) -> (usize, bool) {
    let signs: Vec<i8> = values
        .windows(2)
        .filter_map(|w| match w[1].partial_cmp(&w[0]) {
            Some(std::cmp::Ordering::Greater) => Some(1),
            Some(std::cmp::Ordering::Less) => Some(-1),
            _ => None,
        })
        .collect();
    let changes: Vec<_> = signs.windows(2).filter(|w| w[0] != w[1]).collect();
    let rising_to_falling = changes.iter().all(|w| w[0] == 1 && w[1] == -1);
    (changes.len(), rising_to_falling)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}
