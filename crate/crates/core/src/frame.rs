//! IR-UWB PPDU structure.
//!
//! A PPDU is a synchronization header (SHR: four preamble Kasami sequences
//! plus one SFD sequence), a BCH-protected physical header (PHR) and the
//! PSDU. The PSDU carries the MPDU (MAC header, frame body, FCS), stuffing
//! bits that pad the last BCH message block, and the BCH parity bits.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, ModelError, Result};

/// MAC header plus frame check sequence, in bits.
///
/// Only the sum enters the frame arithmetic. The per-field split is not
/// modelled (the usual split is a 56-bit header and a 16-bit FCS).
pub const MAC_HEADER_FCS_BITS: u32 = 72;

/// Length of one Kasami sequence in the SHR.
pub const KASAMI_LEN: u32 = 63;

/// `(n, k; t)` binary BCH block code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BchCode {
    /// Codeword length in bits.
    pub n: u32,
    /// Message length in bits.
    pub k: u32,
    /// Number of correctable bit errors per codeword.
    pub t: u32,
}

impl BchCode {
    /// PSDU code in the default mode.
    pub const PSDU_DEFAULT: BchCode = BchCode { n: 63, k: 51, t: 2 };
    /// Shortened PHR code in the default mode.
    pub const PHR_DEFAULT: BchCode = BchCode { n: 40, k: 28, t: 2 };
    /// PSDU code in the high-QoS mode. Carried as data only.
    pub const PSDU_HIGH_QOS: BchCode = BchCode {
        n: 126,
        k: 63,
        t: 7,
    };
    /// PHR code in the high-QoS mode. Carried as data only.
    pub const PHR_HIGH_QOS: BchCode = BchCode {
        n: 91,
        k: 28,
        t: 10,
    };

    pub fn new(n: u32, k: u32, t: u32) -> Result<Self> {
        let reason = if k == 0 {
            Some("k must be at least 1")
        } else if k >= n {
            Some("k must be smaller than n")
        } else if t == 0 {
            Some("t must be at least 1")
        } else if t >= n {
            Some("t must be smaller than n")
        } else {
            None
        };
        match reason {
            Some(reason) => Err(ModelError::InvalidCode { n, k, t, reason }),
            None => Ok(BchCode { n, k, t }),
        }
    }

    pub fn parity_bits(&self) -> u32 {
        self.n - self.k
    }

    pub fn code_rate(&self) -> f64 {
        f64::from(self.k) / f64::from(self.n)
    }
}

/// Symbol durations of the six on-off modulation rates, keyed by pulses per burst.
const SYMBOL_TIMES: [(u32, f64); 6] = [
    (1, 64.1e-9),
    (2, 128.2e-9),
    (4, 256.4e-9),
    (8, 512.8e-9),
    (16, 1025.6e-9),
    (32, 2051.3e-9),
];

/// Burst duration as a fraction of the symbol duration.
pub const DUTY_CYCLE: f64 = 1.0 / 32.0;

/// One row of the PHY data-rate table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhyMode {
    /// Pulses per burst.
    pub n_cpb: u32,
    /// Burst duration, seconds.
    pub t_w: f64,
    /// Symbol duration, seconds.
    pub t_sym: f64,
    /// Uncoded bit rate `1 / t_sym`, bits/s.
    pub rate_uncoded: f64,
    /// Coded bit rate after the default PSDU BCH code, bits/s.
    pub rate_coded: f64,
}

impl PhyMode {
    /// Allowed pulses-per-burst values, in ascending order.
    pub const N_CPB_VALUES: [u32; 6] = [1, 2, 4, 8, 16, 32];

    pub fn from_n_cpb(n_cpb: u32) -> Result<Self> {
        SYMBOL_TIMES
            .iter()
            .find(|(n, _)| *n == n_cpb)
            .map(|&(n, t_sym)| Self::from_symbol_time(n, t_sym))
            .ok_or(ModelError::UnknownMode(n_cpb))
    }

    fn from_symbol_time(n_cpb: u32, t_sym: f64) -> Self {
        let rate_uncoded = 1.0 / t_sym;
        PhyMode {
            n_cpb,
            t_w: t_sym * DUTY_CYCLE,
            t_sym,
            rate_uncoded,
            rate_coded: rate_uncoded * BchCode::PSDU_DEFAULT.code_rate(),
        }
    }

    /// All six modes, ascending in `n_cpb` (descending in rate).
    pub fn all() -> [PhyMode; 6] {
        SYMBOL_TIMES.map(|(n, t_sym)| Self::from_symbol_time(n, t_sym))
    }
}

/// Fixed PPDU overhead parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameConstants {
    /// SHR duration, seconds.
    pub t_shr: f64,
    /// PHR duration, seconds.
    pub t_phr: f64,
    /// PHR length in bits (after BCH encoding).
    pub n_phr: u32,
    /// SHR length in bits (five Kasami sequences).
    pub n_shr: u32,
    /// MAC header plus FCS, bits.
    pub n_mh_plus_fcs: u32,
    pub kasami_len: u32,
    /// Number of preamble Kasami sequences (the SFD is one more).
    pub kasami_count: u32,
    /// Bit errors tolerated when detecting one Kasami sequence.
    pub rho_sensitivity: u32,
    /// Pulses per burst used for the SHR.
    pub n_cpb_shr: u32,
    /// Pulses per burst used for the PHR.
    pub n_cpb_phr: u32,
    /// Single-pulse duration, seconds.
    pub t_p: f64,
}

impl Default for FrameConstants {
    fn default() -> Self {
        FrameConstants {
            // 5 sequences x 63 chips x 128 ns
            t_shr: 5.0 * 63.0 * 128e-9,
            // 40 bits at the N_cpb = 32 symbol time
            t_phr: 40.0 * 2051.3e-9,
            n_phr: 40,
            n_shr: 5 * KASAMI_LEN,
            n_mh_plus_fcs: MAC_HEADER_FCS_BITS,
            kasami_len: KASAMI_LEN,
            kasami_count: 4,
            rho_sensitivity: 6,
            n_cpb_shr: 4,
            n_cpb_phr: 32,
            t_p: 2.0032e-9,
        }
    }
}

impl FrameConstants {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("frame.t_shr", self.t_shr)?;
        ensure_positive("frame.t_phr", self.t_phr)?;
        ensure_positive("frame.t_p", self.t_p)?;
        for (name, n) in [
            ("frame.n_cpb_shr", self.n_cpb_shr),
            ("frame.n_cpb_phr", self.n_cpb_phr),
        ] {
            PhyMode::from_n_cpb(n).map_err(|_| ModelError::Domain {
                name,
                value: f64::from(n),
                reason: "must be one of 1, 2, 4, 8, 16, 32",
            })?;
        }
        if self.kasami_count == 0 || self.rho_sensitivity > self.kasami_len {
            return Err(ModelError::Domain {
                name: "frame.rho_sensitivity",
                value: f64::from(self.rho_sensitivity),
                reason: "must not exceed the Kasami length, with at least one preamble sequence",
            });
        }
        Ok(())
    }

    /// SHR plus PHR airtime.
    pub fn overhead_time(&self) -> f64 {
        self.t_shr + self.t_phr
    }
}

/// Bit budget of one PSDU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PsduLayout {
    /// MPDU bits before stuffing (`frame body + 72`).
    pub n_mpdu_prime: u32,
    /// Stuffing bits appended to fill the last message block.
    pub n_bs: u32,
    /// Number of BCH codewords.
    pub n_cw: u32,
    /// Total PSDU bits including parity.
    pub n_t: u32,
}

/// Number of codewords in an `n_t`-bit PSDU, `ceil(n_t / n)`.
///
/// This is the approximation used by the optimizer; [`psdu_layout`] gives
/// the exact count from the frame-body length.
pub fn codeword_count(n_t: u32, code: BchCode) -> Result<u32> {
    if n_t < code.n {
        return Err(ModelError::InvalidFrame { n_t, n: code.n });
    }
    Ok(n_t.div_ceil(code.n))
}

pub fn psdu_layout(n_fb_prime: u32, code: BchCode) -> PsduLayout {
    let n_mpdu_prime = n_fb_prime + MAC_HEADER_FCS_BITS;
    let n_cw = n_mpdu_prime.div_ceil(code.k);
    let n_bs = n_cw * code.k - n_mpdu_prime;
    PsduLayout {
        n_mpdu_prime,
        n_bs,
        n_cw,
        n_t: n_mpdu_prime + n_bs + code.parity_bits() * n_cw,
    }
}

/// PPDU airtime `t_shr + t_phr + n_t * t_sym`.
pub fn frame_duration(n_t: u32, mode: &PhyMode, consts: &FrameConstants) -> f64 {
    consts.overhead_time() + f64::from(n_t) * mode.t_sym
}

#[cfg(test)]
mod tests {
    use super::*;

    const PSDU: BchCode = BchCode::PSDU_DEFAULT;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn codeword_count_examples() {
        assert_eq!(codeword_count(63, PSDU).unwrap(), 1);
        assert_eq!(codeword_count(64, PSDU).unwrap(), 2);
        assert_eq!(codeword_count(2616, PSDU).unwrap(), 42);
    }

    #[test]
    fn codeword_count_rejects_short_frames() {
        assert_eq!(
            codeword_count(62, PSDU),
            Err(ModelError::InvalidFrame { n_t: 62, n: 63 })
        );
    }

    #[test]
    fn psdu_layout_examples() {
        let empty = psdu_layout(0, PSDU);
        assert_eq!(
            empty,
            PsduLayout {
                n_mpdu_prime: 72,
                n_bs: 30,
                n_cw: 2,
                n_t: 126
            }
        );
        let exact = psdu_layout(30, PSDU);
        assert_eq!(
            exact,
            PsduLayout {
                n_mpdu_prime: 102,
                n_bs: 0,
                n_cw: 2,
                n_t: 126
            }
        );
        let l = psdu_layout(500, PSDU);
        assert_eq!(
            l,
            PsduLayout {
                n_mpdu_prime: 572,
                n_bs: 40,
                n_cw: 12,
                n_t: 756
            }
        );
        assert_eq!(l.n_t, 63 * l.n_cw);
    }

    #[test]
    fn approximate_codeword_count_is_exact_for_encoded_frames() {
        // Every encoded PSDU is a whole number of codewords, so ceil(n_t/n)
        // recovers the exact count for all frame bodies up to 255 octets.
        for n_fb in 0..=2040 {
            let l = psdu_layout(n_fb, PSDU);
            assert_eq!(codeword_count(l.n_t, PSDU).unwrap(), l.n_cw);
        }
        // The ceiling only matters for frame sizes off the 63-bit grid such
        // as the 2616-bit static frame (41.52 -> 42 codewords).
        assert_eq!(codeword_count(2616, PSDU).unwrap(), 42);
        assert_eq!(psdu_layout(2040, PSDU).n_t, 2646);
    }

    #[test]
    fn code_validation() {
        assert!(BchCode::new(63, 51, 2).is_ok());
        assert!(BchCode::new(40, 40, 2).is_err());
        assert!(BchCode::new(40, 0, 2).is_err());
        assert!(BchCode::new(40, 28, 0).is_err());
        assert_eq!(BchCode::PHR_DEFAULT.parity_bits(), 12);
    }

    #[test]
    fn mode_table_is_consistent() {
        let modes = PhyMode::all();
        assert_eq!(modes.map(|m| m.n_cpb), PhyMode::N_CPB_VALUES);
        for m in modes {
            assert!(close(m.t_sym, 32.0 * m.t_w, 1e-15));
            assert!(close(m.rate_uncoded * m.t_sym, 1.0, 1e-15));
            assert!(close(m.rate_coded / m.rate_uncoded, 51.0 / 63.0, 1e-3));
            assert_eq!(PhyMode::from_n_cpb(m.n_cpb).unwrap(), m);
        }
        assert_eq!(PhyMode::from_n_cpb(3), Err(ModelError::UnknownMode(3)));
    }

    #[test]
    fn frame_constants_defaults() {
        let c = FrameConstants::default();
        assert!(close(c.t_shr, 40.32e-6, 1e-12));
        assert!(close(c.t_phr, 82.052e-6, 1e-12));
        assert_eq!((c.n_phr, c.n_shr, c.n_mh_plus_fcs), (40, 315, 72));
        assert_eq!((c.n_cpb_shr, c.n_cpb_phr, c.rho_sensitivity), (4, 32, 6));
    }

    #[test]
    fn frame_duration_examples() {
        let c = FrameConstants::default();
        let m32 = PhyMode::from_n_cpb(32).unwrap();
        let m1 = PhyMode::from_n_cpb(1).unwrap();
        assert!(close(frame_duration(0, &m32, &c), 122.372e-6, 1e-12));
        assert!(close(
            frame_duration(1000, &m32, &c),
            122.372e-6 + 2.0513e-3,
            1e-12
        ));
        assert!(close(
            frame_duration(1000, &m1, &c),
            122.372e-6 + 64.1e-6,
            1e-12
        ));
    }

    #[test]
    fn frame_duration_is_monotone() {
        let c = FrameConstants::default();
        let modes = PhyMode::all();
        for pair in modes.windows(2) {
            assert!(frame_duration(500, &pair[1], &c) > frame_duration(500, &pair[0], &c));
        }
        for m in modes {
            for n_t in 63..2000 {
                assert!(frame_duration(n_t + 1, &m, &c) > frame_duration(n_t, &m, &c));
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn layout_fills_whole_codewords(n_fb in 0u32..100_000) {
                let l = psdu_layout(n_fb, PSDU);
                prop_assert_eq!(l.n_t % PSDU.n, 0);
                prop_assert!(l.n_bs < PSDU.k);
                prop_assert_eq!(l.n_t, l.n_cw * PSDU.n);
            }
        }
    }
}
