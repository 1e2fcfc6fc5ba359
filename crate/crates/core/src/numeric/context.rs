use std::f64::consts::LN_2;

use super::NumericError;

/// Working precision plus the relative tolerance every returned value must meet.
///
/// `bits` is where adaptive evaluation starts; `max_bits` caps the doubling.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionContext {
    bits: u32,
    rel_tol: f64,
    max_bits: u32,
    max_terms: usize,
}

impl PrecisionContext {
    pub const MIN_BITS: u32 = 64;
    pub const GUARD_BITS: u32 = 64;
    pub const DEFAULT_MAX_TERMS: usize = 2_000_000;

    pub fn new(bits: u32, rel_tol: f64, max_bits: u32) -> Result<Self, NumericError> {
        if bits < Self::MIN_BITS {
            return Err(NumericError::InvalidContext(format!(
                "bits = {bits} is below the minimum of {}",
                Self::MIN_BITS
            )));
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(NumericError::InvalidContext(format!(
                "rel_tol = {rel_tol} must lie in (0, 1)"
            )));
        }
        if max_bits < bits {
            return Err(NumericError::InvalidContext(format!(
                "max_bits = {max_bits} is below bits = {bits}"
            )));
        }
        Ok(Self {
            bits,
            rel_tol,
            max_bits,
            max_terms: Self::DEFAULT_MAX_TERMS,
        })
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms.max(1);
        self
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_bits(&self) -> u32 {
        self.max_bits
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn ln_rel_tol(&self) -> f64 {
        self.rel_tol.ln()
    }

    /// Same tolerance and cap, starting precision replaced.
    pub fn with_bits(&self, bits: u32) -> Result<Self, NumericError> {
        if bits > self.max_bits {
            return Err(NumericError::PrecisionExhausted {
                needed: bits,
                max: self.max_bits,
            });
        }
        let mut out = self.clone();
        out.bits = bits.max(Self::MIN_BITS);
        Ok(out)
    }

    /// Raises the starting precision so that a sum whose largest term exceeds the
    /// expected result by `cancellation_nats` still keeps `GUARD_BITS` of headroom.
    ///
    /// The result is rounded up to a multiple of 64 bits.
    pub fn with_headroom(&self, cancellation_nats: f64) -> Result<Self, NumericError> {
        let extra = if cancellation_nats.is_finite() && cancellation_nats > 0.0 {
            (cancellation_nats / LN_2).ceil() as u64
        } else {
            0
        };
        let tol_bits = (-self.rel_tol.log2()).ceil().max(0.0) as u64;
        let required = extra + tol_bits + u64::from(Self::GUARD_BITS);
        let required = required.div_ceil(64) * 64;
        let bits = u64::from(self.bits).max(required);
        if bits > u64::from(self.max_bits) {
            return Err(NumericError::PrecisionExhausted {
                needed: bits.min(u64::from(u32::MAX)) as u32,
                max: self.max_bits,
            });
        }
        self.with_bits(bits as u32)
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self {
            bits: 256,
            rel_tol: 1e-60,
            max_bits: 16384,
            max_terms: Self::DEFAULT_MAX_TERMS,
        }
    }
}
