//! Success probabilities of the SHR, PHR and PSDU given the raw bit-error rate.

use serde::{Deserialize, Serialize};

use crate::channel::LinkBudget;
use crate::error::Result;
use crate::frame::{BchCode, FrameConstants, PhyMode};

/// `C(n, k)` computed exactly. Valid for every `n <= 66`.
pub fn binomial_coefficient(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * u128::from(n - i) / u128::from(i + 1);
    }
    u64::try_from(c).expect("binomial coefficient overflows u64")
}

/// `P(X <= t)` for `X ~ Binomial(n, p)`, together with its logarithm.
///
/// When the upper tail is the small side it is summed directly and the
/// result formed as `1 - tail` / `ln_1p(-tail)`, so `ln` of a success
/// probability within 1e-30 of one is still resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialCdf {
    pub value: f64,
    pub ln_value: f64,
}

pub fn binomial_cdf(p: f64, n: u32, t: u32) -> BinomialCdf {
    if t >= n || p <= 0.0 {
        return BinomialCdf {
            value: 1.0,
            ln_value: 0.0,
        };
    }
    if p >= 1.0 {
        return BinomialCdf {
            value: 0.0,
            ln_value: f64::NEG_INFINITY,
        };
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let ln_term = |i: u32| {
        (binomial_coefficient(n, i) as f64).ln() + f64::from(i) * ln_p + f64::from(n - i) * ln_q
    };
    if f64::from(n) * p <= f64::from(t) {
        let tail: f64 = (t + 1..=n).map(|i| ln_term(i).exp()).sum();
        BinomialCdf {
            value: 1.0 - tail,
            ln_value: (-tail).ln_1p(),
        }
    } else {
        let logs: Vec<f64> = (0..=t).map(ln_term).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ln_value = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
        BinomialCdf {
            value: ln_value.exp(),
            ln_value,
        }
    }
}

/// Probability that one 63-bit Kasami sequence is detected with at most `rho` bit errors.
pub fn kasami_success(p_b: f64, rho: u32) -> f64 {
    binomial_cdf(p_b, crate::frame::KASAMI_LEN, rho).value
}

/// SHR success: the SFD is detected and at least one of the four preamble
/// sequences is detected. The SFD shares the Kasami detection probability.
///
/// Note this is not `p_kasami^4`; for small `p_kasami` it behaves like
/// `4 p_kasami^2`.
pub fn shr_success(p_kasami: f64) -> f64 {
    p_kasami * (1.0 - (1.0 - p_kasami).powi(4))
}

/// Probability that a `block_len`-bit block has at most `t` errors.
pub fn bch_block_success(p_b: f64, block_len: u32, t: u32) -> f64 {
    binomial_cdf(p_b, block_len, t).value
}

/// Which burst order sets the bit-error rate of each PPDU part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReliabilityMode {
    /// SHR, PHR and PSDU each use the bit-error rate of their own burst
    /// order (`n_cpb_shr`, `n_cpb_phr`, payload mode).
    #[default]
    FrameSpecific,
    /// All three parts use the payload bit-error rate.
    Strict,
}

/// Raw bit-error probability seen by each part of the PPDU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitErrorProfile {
    pub shr: f64,
    pub phr: f64,
    pub psdu: f64,
}

impl BitErrorProfile {
    pub fn uniform(p_b: f64) -> Self {
        BitErrorProfile {
            shr: p_b,
            phr: p_b,
            psdu: p_b,
        }
    }

    pub fn for_link(
        lb: &LinkBudget,
        payload: &PhyMode,
        consts: &FrameConstants,
        mode: ReliabilityMode,
    ) -> Result<Self> {
        let psdu = lb.bit_error_prob(payload);
        Ok(match mode {
            ReliabilityMode::Strict => Self::uniform(psdu),
            ReliabilityMode::FrameSpecific => BitErrorProfile {
                shr: lb.bit_error_prob(&PhyMode::from_n_cpb(consts.n_cpb_shr)?),
                phr: lb.bit_error_prob(&PhyMode::from_n_cpb(consts.n_cpb_phr)?),
                psdu,
            },
        })
    }
}

/// Per-part success probabilities that do not depend on the PSDU length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkReliability {
    pub p_kasami: f64,
    pub p_shr: f64,
    pub p_phr: f64,
    pub p_cw: f64,
    /// `ln p_cw`, accurate when `p_cw` rounds to one.
    pub ln_p_cw: f64,
    pub code: BchCode,
}

impl LinkReliability {
    pub fn new(
        profile: &BitErrorProfile,
        consts: &FrameConstants,
        psdu: BchCode,
        phr: BchCode,
    ) -> Self {
        let p_kasami = binomial_cdf(profile.shr, consts.kasami_len, consts.rho_sensitivity).value;
        let cw = binomial_cdf(profile.psdu, psdu.n, psdu.t);
        LinkReliability {
            p_kasami,
            p_shr: shr_success(p_kasami),
            p_phr: bch_block_success(profile.phr, consts.n_phr, phr.t),
            p_cw: cw.value,
            ln_p_cw: cw.ln_value,
            code: psdu,
        }
    }

    /// `p_shr * p_phr`.
    pub fn header_success(&self) -> f64 {
        self.p_shr * self.p_phr
    }

    pub fn frame(&self, n_t: u32) -> FrameReliability {
        let n_cw = n_t.div_ceil(self.code.n);
        let p_psdu = psdu_success(self.ln_p_cw, f64::from(n_cw));
        FrameReliability {
            p_kasami: self.p_kasami,
            p_sfd: self.p_kasami,
            p_shr: self.p_shr,
            p_phr: self.p_phr,
            p_cw: self.p_cw,
            p_psdu,
            p_ppdu: self.header_success() * p_psdu,
        }
    }
}

/// `p_cw^codewords`, evaluated as `exp(codewords * ln p_cw)`.
pub fn psdu_success(ln_p_cw: f64, codewords: f64) -> f64 {
    if codewords == 0.0 {
        1.0
    } else {
        (codewords * ln_p_cw).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameReliability {
    pub p_kasami: f64,
    pub p_sfd: f64,
    pub p_shr: f64,
    pub p_phr: f64,
    pub p_cw: f64,
    pub p_psdu: f64,
    pub p_ppdu: f64,
}

/// PPDU success with a single bit-error rate for every part.
pub fn ppdu_success(
    p_b: f64,
    n_t: u32,
    consts: &FrameConstants,
    code: BchCode,
) -> FrameReliability {
    ppdu_success_with_profile(&BitErrorProfile::uniform(p_b), n_t, consts, code)
}

pub fn ppdu_success_with_profile(
    profile: &BitErrorProfile,
    n_t: u32,
    consts: &FrameConstants,
    code: BchCode,
) -> FrameReliability {
    LinkReliability::new(profile, consts, code, BchCode::PHR_DEFAULT).frame(n_t)
}
