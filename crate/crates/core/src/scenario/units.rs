//! Quantities with mandatory units: "10Gbps", "50ns", "1KB", "25MHz", "10dB".
//!
//! Decimal mantissas are parsed exactly, so "2.5Gbps" is 2 500 000 000 b/s
//! with no floating-point detour.

use crate::time::TimePs;

/// Splits "12.5ns" into an exact decimal (`digits / 10^scale`) and a unit.
fn split(s: &str) -> Result<(u128, u32, &str), String> {
    let s = s.trim();
    let end = s.find(|c: char| !(c.is_ascii_digit() || c == '.')).unwrap_or(s.len());
    let (num, unit) = s.split_at(end);
    if num.is_empty() {
        return Err(format!("\"{s}\" does not start with a number"));
    }
    if unit.trim().is_empty() {
        return Err(format!("\"{s}\" has no unit"));
    }
    let (int, frac) = num.split_once('.').unwrap_or((num, ""));
    if int.is_empty() || frac.contains('.') {
        return Err(format!("\"{num}\" is not a decimal number"));
    }
    let digits: String = [int, frac].concat();
    let value = digits.parse::<u128>().map_err(|_| format!("\"{num}\" is out of range"))?;
    Ok((value, frac.len() as u32, unit.trim()))
}

/// `digits · factor / 10^scale`, required to be an integer.
fn exact(digits: u128, scale: u32, factor: u128, what: &str, s: &str) -> Result<u128, String> {
    let den = 10u128.checked_pow(scale).ok_or_else(|| format!("\"{s}\" has too many decimals"))?;
    let num = digits.checked_mul(factor).ok_or_else(|| format!("\"{s}\" is out of range"))?;
    if num % den != 0 {
        return Err(format!("\"{s}\" is not a whole number of {what}"));
    }
    Ok(num / den)
}

pub fn parse_rate(s: &str) -> Result<u64, String> {
    let (d, scale, unit) = split(s)?;
    let factor: u128 = match unit {
        "bps" | "b/s" => 1,
        "kbps" | "Kbps" => 1_000,
        "Mbps" => 1_000_000,
        "Gbps" => 1_000_000_000,
        "Tbps" => 1_000_000_000_000,
        _ => return Err(format!("unknown rate unit \"{unit}\" (use bps, Kbps, Mbps, Gbps or Tbps)")),
    };
    let v = exact(d, scale, factor, "bits per second", s)?;
    u64::try_from(v).map_err(|_| format!("\"{s}\" is out of range"))
}

/// Sizes in bits. "B" is a byte; "KB" and "MB" are decimal (1KB = 8000 bits).
pub fn parse_size(s: &str) -> Result<u64, String> {
    let (d, scale, unit) = split(s)?;
    let factor: u128 = match unit {
        "b" | "bit" | "bits" => 1,
        "Kb" | "kb" => 1_000,
        "B" => 8,
        "KB" | "kB" => 8_000,
        "MB" => 8_000_000,
        _ => return Err(format!("unknown size unit \"{unit}\" (use bits, Kb, B, KB or MB)")),
    };
    let v = exact(d, scale, factor, "bits", s)?;
    u64::try_from(v).map_err(|_| format!("\"{s}\" is out of range"))
}

/// Durations, rounded half-up to a picosecond.
pub fn parse_duration(s: &str) -> Result<TimePs, String> {
    let (d, scale, unit) = split(s)?;
    let factor: u128 = match unit {
        "ps" => 1,
        "ns" => 1_000,
        "us" | "µs" => 1_000_000,
        "ms" => 1_000_000_000,
        "s" => 1_000_000_000_000,
        _ => return Err(format!("unknown time unit \"{unit}\" (use ps, ns, us, ms or s)")),
    };
    let den = 10u128.checked_pow(scale).ok_or_else(|| format!("\"{s}\" has too many decimals"))?;
    let num = d.checked_mul(factor).ok_or_else(|| format!("\"{s}\" is out of range"))?;
    let ps = num / den + u128::from(2 * (num % den) >= den);
    u64::try_from(ps).map(TimePs::from_ps).map_err(|_| format!("\"{s}\" is out of range"))
}

pub fn parse_frequency(s: &str) -> Result<u64, String> {
    let (d, scale, unit) = split(s)?;
    let factor: u128 = match unit {
        "Hz" => 1,
        "kHz" => 1_000,
        "MHz" => 1_000_000,
        "GHz" => 1_000_000_000,
        _ => return Err(format!("unknown frequency unit \"{unit}\" (use Hz, kHz, MHz or GHz)")),
    };
    let v = exact(d, scale, factor, "hertz", s)?;
    u64::try_from(v).map_err(|_| format!("\"{s}\" is out of range"))
}

/// Power ratios in dB (optionally signed) or linear with an "x" suffix.
pub fn parse_power(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t),
    };
    let (d, scale, unit) = split(body)?;
    let v = sign * d as f64 / 10f64.powi(scale as i32);
    let linear = match unit {
        "dB" => 10f64.powf(v / 10.0),
        "x" if sign > 0.0 => v,
        _ => return Err(format!("unknown power unit \"{unit}\" in \"{s}\" (use dB or x)")),
    };
    if linear.is_finite() && linear > 0.0 {
        Ok(linear)
    } else {
        Err(format!("\"{s}\" is not a positive power"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_and_sizes() {
        assert_eq!(parse_rate("10Gbps"), Ok(10_000_000_000));
        assert_eq!(parse_rate("2.5Gbps"), Ok(2_500_000_000));
        assert_eq!(parse_rate("400 Mbps"), Ok(400_000_000));
        assert!(parse_rate("1.5bps").is_err());
        assert!(parse_rate("10").unwrap_err().contains("no unit"));
        assert!(parse_rate("10GB").unwrap_err().contains("unknown rate unit"));
        assert_eq!(parse_size("1KB"), Ok(8000));
        assert_eq!(parse_size("1492B"), Ok(11_936));
        assert_eq!(parse_size("8000bits"), Ok(8000));
    }

    #[test]
    fn durations_round_once() {
        assert_eq!(parse_duration("50ns"), Ok(TimePs::from_ns(50)));
        assert_eq!(parse_duration("1.2467us"), Ok(TimePs::from_ps(1_246_700)));
        assert_eq!(parse_duration("0.0005ps"), Ok(TimePs::ZERO));
        assert_eq!(parse_duration("0.5ps"), Ok(TimePs::from_ps(1)));
        assert_eq!(parse_duration("1s"), Ok(TimePs::from_ps(1_000_000_000_000)));
        assert!(parse_duration("ns").is_err());
        assert!(parse_duration("1.2.3ns").is_err());
    }

    #[test]
    fn frequency_and_power() {
        assert_eq!(parse_frequency("25MHz"), Ok(25_000_000));
        assert_eq!(parse_frequency("30.72MHz"), Ok(30_720_000));
        assert!((parse_power("10dB").unwrap() - 10.0).abs() < 1e-12);
        assert!((parse_power("-3dB").unwrap() - 0.501_187_233_627_272_3).abs() < 1e-12);
        assert_eq!(parse_power("2.5x"), Ok(2.5));
        assert!(parse_power("10").is_err());
    }
}
