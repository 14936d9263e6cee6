//! Closed-form 802.11a timing and a threshold frame-error model.

use crate::error::{Error, Result};

/// 802.11a data rates, Mbit/s.
pub const RATES_MBPS: [u32; 8] = [6, 9, 12, 18, 24, 36, 48, 54];
/// Mandatory rates usable for control responses.
pub const MANDATORY_RATES_MBPS: [u32; 3] = [6, 12, 24];

/// SNR (dB) at which a frame at each rate succeeds with probability 0.5.
pub const SNR_THRESHOLDS_DB: [f64; 8] = [5.0, 6.0, 8.0, 11.0, 14.0, 18.0, 22.0, 24.0];

pub const SLOT_NS: u64 = 9_000;
pub const SIFS_NS: u64 = 16_000;
pub const DIFS_NS: u64 = SIFS_NS + 2 * SLOT_NS;
pub const CW_MIN: u64 = 15;
/// Mean backoff with an idle medium: `CW_MIN / 2` slots.
pub const MEAN_BACKOFF_NS: u64 = CW_MIN * SLOT_NS / 2;
/// PLCP preamble plus SIGNAL field.
pub const PREAMBLE_NS: u64 = 20_000;
pub const SYMBOL_NS: u64 = 4_000;
/// SERVICE (16) and tail (6) bits added to every PSDU.
pub const PHY_OVERHEAD_BITS: u64 = 22;
/// UDP (8) + IPv4 (20) + LLC/SNAP (8) + MAC header and FCS (28) bytes.
pub const MPDU_OVERHEAD_BYTES: u64 = 8 + 20 + 8 + 28;
pub const ACK_BYTES: u64 = 14;

pub fn rate_index(rate_mbps: u32) -> Result<usize> {
    RATES_MBPS
        .iter()
        .position(|&r| r == rate_mbps)
        .ok_or_else(|| Error::validation(format!("unknown 802.11a rate {rate_mbps} Mbit/s")))
}

/// Data bits per OFDM symbol.
pub fn data_bits_per_symbol(rate_mbps: u32) -> Result<u64> {
    rate_index(rate_mbps)?;
    Ok(rate_mbps as u64 * 4)
}

/// Highest mandatory rate not above `rate_mbps`.
pub fn ack_rate(rate_mbps: u32) -> Result<u32> {
    rate_index(rate_mbps)?;
    Ok(*MANDATORY_RATES_MBPS
        .iter()
        .rev()
        .find(|&&r| r <= rate_mbps)
        .expect("6 Mbit/s is mandatory"))
}

/// PPDU duration for a PSDU of `bytes` at `rate_mbps`.
pub fn ppdu_ns(rate_mbps: u32, bytes: u64) -> Result<u64> {
    let ndbps = data_bits_per_symbol(rate_mbps)?;
    let symbols = (PHY_OVERHEAD_BITS + 8 * bytes).div_ceil(ndbps);
    Ok(PREAMBLE_NS + SYMBOL_NS * symbols)
}

/// Channel time of one frame exchange, nanoseconds:
/// DIFS + mean backoff + data PPDU + SIFS + ACK PPDU.
pub fn airtime_ns(rate_mbps: u32, payload_bytes: u64) -> Result<u64> {
    let data = ppdu_ns(rate_mbps, payload_bytes + MPDU_OVERHEAD_BYTES)?;
    let ack = ppdu_ns(ack_rate(rate_mbps)?, ACK_BYTES)?;
    Ok(DIFS_NS + MEAN_BACKOFF_NS + data + SIFS_NS + ack)
}

/// [`airtime_ns`] in microseconds.
pub fn airtime(rate_mbps: u32, payload_bytes: u64) -> Result<f64> {
    Ok(airtime_ns(rate_mbps, payload_bytes)? as f64 / 1000.0)
}

/// Frame success probability at `snr_db`: 0 below `T - 1`, 1 above `T + 1`,
/// linear in between, where `T` is the rate's threshold.
pub fn success_probability(snr_db: f64, rate_mbps: u32) -> Result<f64> {
    let t = SNR_THRESHOLDS_DB[rate_index(rate_mbps)?];
    Ok(((snr_db - (t - 1.0)) / 2.0).clamp(0.0, 1.0))
}
