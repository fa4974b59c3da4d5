use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IngestError;

pub const MICROMIDI_MIN: u16 = 40;
pub const MICROMIDI_MAX: u16 = 200;
pub const MICROMIDI_STEP_CENTS: f64 = 50.0;

const PITCH_CLASSES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

/// Doubled-resolution MIDI note number: standard MIDI times two, so odd
/// values sit a quarter tone between semitones.
///
/// Odd values are named as a *sori* (half-sharp) of the natural below when
/// there is one, otherwise as a *koron* (half-flat) of the natural above.
/// Octave numbering puts MIDI 60 at C3, so 110 is G2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct MicroMidi(u16);

impl MicroMidi {
    pub fn new(value: u16) -> Result<Self, IngestError> {
        if (MICROMIDI_MIN..=MICROMIDI_MAX).contains(&value) {
            Ok(MicroMidi(value))
        } else {
            Err(IngestError::Domain(format!(
                "micromidi {value} outside supported range [{MICROMIDI_MIN}, {MICROMIDI_MAX}]"
            )))
        }
    }

    /// Skips the range check; for constants known to be in range.
    #[cfg(test)]
    pub(crate) const fn unchecked(value: u16) -> Self {
        MicroMidi(value)
    }

    pub fn value(self) -> u16 {
        self.0
    }

    /// Signed distance `self - other` in cents.
    pub fn cents_from(self, other: MicroMidi) -> f64 {
        (i32::from(self.0) - i32::from(other.0)) as f64 * MICROMIDI_STEP_CENTS
    }

    pub fn name(self) -> String {
        let v = self.0;
        if v.is_multiple_of(2) {
            return semitone_name(v / 2);
        }
        let below = (v - 1) / 2;
        let above = v.div_ceil(2);
        if is_natural(below) {
            format!("{}-sori", semitone_name(below))
        } else {
            // the only other neighbour pattern is sharp below, natural above
            format!("{}-koron", semitone_name(above))
        }
    }

    pub fn from_name(name: &str) -> Result<Self, IngestError> {
        let bad = || IngestError::Domain(format!("unrecognised note name '{name}'"));
        let name = name.trim();
        let (base, quarter): (&str, i32) = if let Some(b) = name.strip_suffix("-sori") {
            (b, 1)
        } else if let Some(b) = name.strip_suffix("-koron") {
            (b, -1)
        } else {
            (name, 0)
        };
        let letter_len = if base.get(1..2) == Some("#") { 2 } else { 1 };
        let (class_name, octave) = base.split_at(letter_len.min(base.len()));
        let class = PITCH_CLASSES
            .iter()
            .position(|c| *c == class_name)
            .ok_or_else(bad)? as i32;
        if quarter != 0 && class_name.ends_with('#') {
            return Err(bad());
        }
        let octave: i32 = octave.parse().map_err(|_| bad())?;
        let midi = (octave + 2) * 12 + class;
        let value = 2 * midi + quarter;
        if value < 0 {
            return Err(bad());
        }
        MicroMidi::new(value as u16)
    }
}

fn is_natural(semitone: u16) -> bool {
    !PITCH_CLASSES[(semitone % 12) as usize].ends_with('#')
}

fn semitone_name(semitone: u16) -> String {
    let class = PITCH_CLASSES[(semitone % 12) as usize];
    let octave = i32::from(semitone / 12) - 2;
    format!("{class}{octave}")
}

impl fmt::Display for MicroMidi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for MicroMidi {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MicroMidi::from_name(s)
    }
}

impl TryFrom<u16> for MicroMidi {
    type Error = IngestError;

    fn try_from(value: u16) -> Result<Self, Self::Error> {
        MicroMidi::new(value)
    }
}

impl From<MicroMidi> for u16 {
    fn from(m: MicroMidi) -> u16 {
        m.0
    }
}
