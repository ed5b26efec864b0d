//! Impact classes and their pitches.
//!
//! A score is rounded to one decimal, looked up in an ordered list of bins and
//! the matching class picks a degree of the schema's scale. The default schema
//! has seven bins and the F natural minor scale anchored at F4:
//!
//! | rounded MNCS | meaning         | class | tone |
//! |--------------|-----------------|-------|------|
//! | ≤ 0.2        | Far below       | 1     | F4   |
//! | 0.3 – 0.7    | Below           | 2     | G4   |
//! | 0.8 – 1.2    | Average         | 3     | G#4  |
//! | 1.3 – 1.6    | Above           | 4     | A#4  |
//! | 1.7 – 2.2    | Far above       | 5     | C5   |
//! | 2.3 – 4.0    | Outreaching     | 6     | C#5  |
//! | ≥ 4.1        | Far outreaching | 7     | D#5  |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ingest::PublicationRecord;
use crate::synthesis::EventSounds;

/// Scores closer than this to a rounding midpoint are treated as the midpoint.
const SNAP_SCALE: f64 = 1e9;

/// Rounds to one decimal place, halves away from zero.
///
/// The input is first snapped to nine decimals so that values written in
/// decimal notation (`0.35`, `1.15`) round as written rather than as their
/// nearest binary approximation.
pub fn round_one_decimal(x: f64) -> f64 {
    to_tenths(x) as f64 / 10.0
}

/// `round_one_decimal(x) * 10` as an exact integer.
pub fn to_tenths(x: f64) -> i64 {
    let snapped = (x.abs() * SNAP_SCALE).round() as i128;
    let step = (SNAP_SCALE / 10.0) as i128;
    let tenths = ((snapped + step / 2) / step) as i64;
    if x < 0.0 {
        -tenths
    } else {
        tenths
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PitchClass {
    C,
    CSharp,
    D,
    DSharp,
    E,
    F,
    FSharp,
    G,
    GSharp,
    A,
    ASharp,
    B,
}

impl PitchClass {
    pub const ALL: [PitchClass; 12] = [
        PitchClass::C,
        PitchClass::CSharp,
        PitchClass::D,
        PitchClass::DSharp,
        PitchClass::E,
        PitchClass::F,
        PitchClass::FSharp,
        PitchClass::G,
        PitchClass::GSharp,
        PitchClass::A,
        PitchClass::ASharp,
        PitchClass::B,
    ];

    /// Semitones above C.
    pub fn chromatic_index(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        const NAMES: [&str; 12] = [
            "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
        ];
        NAMES[self as usize]
    }
}

impl fmt::Display for PitchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PitchClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        let letter = chars.next().map(|c| c.to_ascii_uppercase());
        let base: i8 = match letter {
            Some('C') => 0,
            Some('D') => 2,
            Some('E') => 4,
            Some('F') => 5,
            Some('G') => 7,
            Some('A') => 9,
            Some('B') => 11,
            _ => return Err(Error::Domain(format!("unknown pitch class `{s}`"))),
        };
        let shift: i8 = match chars.as_str() {
            "" => 0,
            "#" | "♯" => 1,
            "b" | "♭" => -1,
            _ => return Err(Error::Domain(format!("unknown pitch class `{s}`"))),
        };
        Ok(PitchClass::ALL[(base + shift).rem_euclid(12) as usize])
    }
}

impl Serialize for PitchClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for PitchClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A pitch class in a given octave, e.g. `G#4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PitchLabel {
    pub pitch_class: PitchClass,
    pub octave: i32,
}

impl PitchLabel {
    pub fn new(pitch_class: PitchClass, octave: i32) -> Self {
        Self {
            pitch_class,
            octave,
        }
    }

    /// MIDI note number with C4 = 60.
    pub fn to_midi(self) -> Result<u8> {
        let n = 12 * (self.octave as i64 + 1) + self.pitch_class.chromatic_index() as i64;
        u8::try_from(n)
            .ok()
            .filter(|n| *n <= 127)
            .ok_or_else(|| Error::Domain(format!("{self} is outside the MIDI range (note {n})")))
    }
}

impl fmt::Display for PitchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.pitch_class, self.octave)
    }
}

pub fn pitch_to_midi(p: PitchLabel) -> Result<u8> {
    p.to_midi()
}

/// Equal-tempered frequency of a MIDI note, `reference_pitch` being A4 (note 69).
pub fn midi_to_freq(note: u8, reference_pitch: f64) -> f64 {
    reference_pitch * 2f64.powf((note as f64 - 69.0) / 12.0)
}

/// One impact class: a closed interval of one-decimal scores. Open ends are
/// `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactBin {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub class: u8,
    pub meaning: String,
}

impl ImpactBin {
    fn new(lower: Option<f64>, upper: Option<f64>, class: u8, meaning: &str) -> Self {
        Self {
            lower,
            upper,
            class,
            meaning: meaning.to_string(),
        }
    }

    /// Whether a score already expressed in tenths falls into this bin.
    pub fn contains_tenths(&self, tenths: i64) -> bool {
        self.lower.is_none_or(|lo| tenths >= to_tenths(lo))
            && self.upper.is_none_or(|hi| tenths <= to_tenths(hi))
    }
}

/// Defines a sonification: score bins, the scale they map to and the sounds
/// used for events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingSchema {
    pub bins: Vec<ImpactBin>,
    pub scale: Vec<PitchClass>,
    #[serde(default = "default_octave_anchor")]
    pub octave_anchor: i32,
    #[serde(default = "default_reference_pitch")]
    pub reference_pitch: f64,
    #[serde(default)]
    pub event_sounds: EventSounds,
}

fn default_octave_anchor() -> i32 {
    4
}

fn default_reference_pitch() -> f64 {
    440.0
}

impl Default for MappingSchema {
    fn default() -> Self {
        use PitchClass::*;
        Self {
            bins: vec![
                ImpactBin::new(None, Some(0.2), 1, "Far below"),
                ImpactBin::new(Some(0.3), Some(0.7), 2, "Below"),
                ImpactBin::new(Some(0.8), Some(1.2), 3, "Average"),
                ImpactBin::new(Some(1.3), Some(1.6), 4, "Above"),
                ImpactBin::new(Some(1.7), Some(2.2), 5, "Far above"),
                ImpactBin::new(Some(2.3), Some(4.0), 6, "Outreaching"),
                ImpactBin::new(Some(4.1), None, 7, "Far outreaching"),
            ],
            scale: vec![F, G, GSharp, ASharp, C, CSharp, DSharp],
            octave_anchor: default_octave_anchor(),
            reference_pitch: default_reference_pitch(),
            event_sounds: EventSounds::default(),
        }
    }
}

impl MappingSchema {
    /// Loads a JSON schema file body and validates it.
    pub fn from_json(raw: &[u8]) -> Result<Self> {
        let schema: MappingSchema = serde_json::from_slice(raw)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn class_count(&self) -> u8 {
        self.bins.len() as u8
    }

    /// Bins must be numbered 1..=n, sit on the one-decimal grid and tile
    /// `[0, ∞)` without gaps or overlaps once scores are rounded.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("mapping schema: {msg}")));
        if self.bins.is_empty() || self.bins.len() > u8::MAX as usize {
            return bad(format!("{} bins", self.bins.len()));
        }
        if self.scale.len() != self.bins.len() {
            return bad(format!(
                "scale has {} tones but there are {} bins",
                self.scale.len(),
                self.bins.len()
            ));
        }
        if !(self.reference_pitch.is_finite() && self.reference_pitch > 0.0) {
            return bad(format!("reference pitch {}", self.reference_pitch));
        }
        for (i, bin) in self.bins.iter().enumerate() {
            if bin.class as usize != i + 1 {
                return bad(format!(
                    "bin {} has class {}, expected {}",
                    i,
                    bin.class,
                    i + 1
                ));
            }
            for bound in [bin.lower, bin.upper].into_iter().flatten() {
                if !bound.is_finite() || (bound * 10.0 - to_tenths(bound) as f64).abs() > 1e-6 {
                    return bad(format!("bound {bound} is not a multiple of 0.1"));
                }
            }
            if let (Some(lo), Some(hi)) = (bin.lower, bin.upper) {
                if to_tenths(lo) > to_tenths(hi) {
                    return bad(format!("class {} is empty ({lo} > {hi})", bin.class));
                }
            }
        }
        let first = &self.bins[0];
        if first.lower.is_some_and(|lo| to_tenths(lo) > 0) {
            return bad("the first bin must start at 0 or be open".into());
        }
        if self.bins.last().and_then(|b| b.upper).is_some() {
            return bad("the last bin must be open-ended".into());
        }
        for pair in self.bins.windows(2) {
            match (pair[0].upper, pair[1].lower) {
                (Some(hi), Some(lo)) if to_tenths(lo) == to_tenths(hi) + 1 => {}
                _ => {
                    return bad(format!(
                        "classes {} and {} do not meet on the 0.1 grid",
                        pair[0].class, pair[1].class
                    ))
                }
            }
        }
        self.event_sounds.validate()?;
        for class in 1..=self.class_count() {
            self.class_to_pitch(class)?.to_midi()?;
        }
        Ok(())
    }

    /// The class of the bin holding `round_one_decimal(mncs)`.
    pub fn classify(&self, mncs: f64) -> Result<u8> {
        if !(mncs.is_finite() && mncs >= 0.0) {
            return Err(Error::Domain(format!("cannot classify score {mncs}")));
        }
        let tenths = to_tenths(mncs);
        self.bins
            .iter()
            .find(|b| b.contains_tenths(tenths))
            .map(|b| b.class)
            .ok_or_else(|| Error::Config(format!("no bin covers score {mncs}")))
    }

    /// The class-th scale degree. Octaves start at `octave_anchor` and go up
    /// by one each time the scale wraps past B.
    pub fn class_to_pitch(&self, class: u8) -> Result<PitchLabel> {
        if class == 0 || class as usize > self.scale.len() {
            return Err(Error::Domain(format!(
                "class {class} is outside 1..={}",
                self.scale.len()
            )));
        }
        let mut octave = self.octave_anchor;
        for pair in self.scale[..class as usize].windows(2) {
            if pair[1].chromatic_index() <= pair[0].chromatic_index() {
                octave += 1;
            }
        }
        Ok(PitchLabel::new(self.scale[class as usize - 1], octave))
    }

    pub fn class_to_midi(&self, class: u8) -> Result<u8> {
        self.class_to_pitch(class)?.to_midi()
    }

    pub fn class_to_freq(&self, class: u8) -> Result<f64> {
        Ok(midi_to_freq(
            self.class_to_midi(class)?,
            self.reference_pitch,
        ))
    }

    pub fn meaning(&self, class: u8) -> Option<&str> {
        self.bins
            .get((class as usize).checked_sub(1)?)
            .map(|b| b.meaning.as_str())
    }
}

pub fn classify(mncs: f64, schema: &MappingSchema) -> Result<u8> {
    schema.classify(mncs)
}

pub fn class_to_pitch(class: u8, schema: &MappingSchema) -> Result<PitchLabel> {
    schema.class_to_pitch(class)
}

/// Sounds a publication contributes, in the order they occur in its slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappedSound {
    Publication,
    OpenAccess,
    ImpactTone,
    ClassMarker,
}

/// A publication with its score resolved and mapped to sound parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappedPublication {
    pub id: String,
    pub mncs: f64,
    pub oa: bool,
    pub class: u8,
    pub pitch: PitchLabel,
    pub midi_note: u8,
    pub freq: f64,
}

impl MappedPublication {
    pub fn sounds(&self) -> Vec<MappedSound> {
        let mut out = vec![MappedSound::Publication];
        if self.oa {
            out.push(MappedSound::OpenAccess);
        }
        out.push(MappedSound::ImpactTone);
        out.push(MappedSound::ClassMarker);
        out
    }
}

pub fn map_record(
    record: &PublicationRecord,
    mncs: f64,
    schema: &MappingSchema,
) -> Result<MappedPublication> {
    let class = schema.classify(mncs)?;
    let pitch = schema.class_to_pitch(class)?;
    let midi_note = pitch.to_midi()?;
    Ok(MappedPublication {
        id: record.id.clone(),
        mncs,
        oa: record.oa,
        class,
        pitch,
        midi_note,
        freq: midi_to_freq(midi_note, schema.reference_pitch),
    })
}
