//! Radio traffic model: sampling parameters to transport rate, packet period
//! and transport delay budget.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::TimePs;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrafficError {
    #[error("quantization width must be at least 1 bit")]
    ZeroQuantization,
    #[error("sampling frequency must be positive")]
    ZeroSampling,
    #[error("payload size must be positive")]
    ZeroPayload,
    #[error("transport rate must be positive")]
    ZeroRate,
    #[error("period of {payload_bits} bits at {rate_bps} b/s does not fit the picosecond time base")]
    PeriodOverflow { payload_bits: u64, rate_bps: u128 },
    #[error("processing time {proc} leaves no transport budget within protocol deadline {prot}")]
    NoTransportBudget { prot: TimePs, proc: TimePs },
    #[error("flow {0} has a fixed rate and cannot be re-quantized")]
    NotQuantizable(FlowId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowId(pub u32);

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Transport rate `2·Q·f` in bits per second.
pub fn flow_rate(quant_bits: u32, sampling_hz: u64) -> Result<u128, TrafficError> {
    if quant_bits == 0 {
        return Err(TrafficError::ZeroQuantization);
    }
    if sampling_hz == 0 {
        return Err(TrafficError::ZeroSampling);
    }
    Ok(2 * u128::from(quant_bits) * u128::from(sampling_hz))
}

/// Packet inter-arrival time `B / R`, rounded half-up to a picosecond.
pub fn inter_arrival(payload_bits: u64, rate_bps: u128) -> Result<TimePs, TrafficError> {
    if payload_bits == 0 {
        return Err(TrafficError::ZeroPayload);
    }
    if rate_bps == 0 {
        return Err(TrafficError::ZeroRate);
    }
    match TimePs::from_ratio_secs(u128::from(payload_bits), rate_bps) {
        Some(t) if !t.is_zero() => Ok(t),
        _ => Err(TrafficError::PeriodOverflow { payload_bits, rate_bps }),
    }
}

/// Transport delay bound left after subtracting the worst-case processing
/// time from the protocol deadline.
pub fn transport_deadline(prot: TimePs, proc: TimePs) -> Result<TimePs, TrafficError> {
    if proc >= prot {
        return Err(TrafficError::NoTransportBudget { prot, proc });
    }
    Ok(prot - proc)
}

/// How a radio's transport rate is determined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateSource {
    /// ADC-driven: rate `2·Q·f`.
    Adc { sampling_hz: u64, quant_bits: u32 },
    /// A rate given directly, e.g. a transcribed "2.5 Gbps" flow.
    Fixed { rate_bps: u64 },
}

/// One radio's traffic: rate, payload, end-to-end bound and edge switch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadioFlow {
    pub id: FlowId,
    pub source: RateSource,
    pub payload_bits: u64,
    pub deadline: TimePs,
    pub edge: usize,
}

impl RadioFlow {
    pub fn adc(
        id: u32,
        sampling_hz: u64,
        quant_bits: u32,
        payload_bits: u64,
        deadline: TimePs,
        edge: usize,
    ) -> Result<Self, TrafficError> {
        let flow = RadioFlow {
            id: FlowId(id),
            source: RateSource::Adc { sampling_hz, quant_bits },
            payload_bits,
            deadline,
            edge,
        };
        flow.period()?;
        Ok(flow)
    }

    pub fn fixed_rate(
        id: u32,
        rate_bps: u64,
        payload_bits: u64,
        deadline: TimePs,
        edge: usize,
    ) -> Result<Self, TrafficError> {
        let flow = RadioFlow { id: FlowId(id), source: RateSource::Fixed { rate_bps }, payload_bits, deadline, edge };
        flow.period()?;
        Ok(flow)
    }

    pub fn rate_bps(&self) -> Result<u128, TrafficError> {
        match self.source {
            RateSource::Adc { sampling_hz, quant_bits } => flow_rate(quant_bits, sampling_hz),
            RateSource::Fixed { rate_bps } if rate_bps > 0 => Ok(u128::from(rate_bps)),
            RateSource::Fixed { .. } => Err(TrafficError::ZeroRate),
        }
    }

    pub fn period(&self) -> Result<TimePs, TrafficError> {
        inter_arrival(self.payload_bits, self.rate_bps()?)
    }

    pub fn quant_bits(&self) -> Option<u32> {
        match self.source {
            RateSource::Adc { quant_bits, .. } => Some(quant_bits),
            RateSource::Fixed { .. } => None,
        }
    }

    /// Same radio re-configured to a different ADC width.
    pub fn with_quantization(&self, quant_bits: u32) -> Result<Self, TrafficError> {
        match self.source {
            RateSource::Adc { sampling_hz, .. } => {
                let mut flow = self.clone();
                flow.source = RateSource::Adc { sampling_hz, quant_bits };
                flow.period()?;
                Ok(flow)
            }
            RateSource::Fixed { .. } => Err(TrafficError::NotQuantizable(self.id)),
        }
    }

    pub fn traffic_spec(&self, tx_time: TimePs) -> Result<TrafficSpec, TrafficError> {
        Ok(TrafficSpec { period: self.period()?, deadline: self.deadline, tx_time })
    }
}

/// `(period, deadline)` with the transmission time on the link under test.
/// Deadlines may be shorter than, equal to, or longer than the period.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrafficSpec {
    pub period: TimePs,
    pub deadline: TimePs,
    pub tx_time: TimePs,
}

impl TrafficSpec {
    pub fn new(period: TimePs, deadline: TimePs, tx_time: TimePs) -> Self {
        TrafficSpec { period, deadline, tx_time }
    }
}
