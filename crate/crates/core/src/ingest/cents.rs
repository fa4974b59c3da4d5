use super::IngestError;

pub const OCTAVE_CENTS: f64 = 1200.0;

/// Interval from `ref_hz` up to `f` in cents: `1200 * log2(f / ref_hz)`.
pub fn hz_to_cents(f: f64, ref_hz: f64) -> Result<f64, IngestError> {
    if !(f > 0.0 && f.is_finite()) || !(ref_hz > 0.0 && ref_hz.is_finite()) {
        return Err(IngestError::Domain(format!(
            "frequencies must be positive and finite (f={f}, ref={ref_hz})"
        )));
    }
    Ok(OCTAVE_CENTS * (f / ref_hz).log2())
}

pub fn cents_to_hz(cents: f64, ref_hz: f64) -> Result<f64, IngestError> {
    if !(ref_hz > 0.0 && ref_hz.is_finite()) || !cents.is_finite() {
        return Err(IngestError::Domain(format!(
            "invalid cents conversion (cents={cents}, ref={ref_hz})"
        )));
    }
    Ok(ref_hz * (cents / OCTAVE_CENTS).exp2())
}
