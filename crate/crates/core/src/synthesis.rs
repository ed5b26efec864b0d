//! Timeline rendering.
//!
//! Three generators cover the audible event kinds:
//!
//! - impact tones are ADSR-shaped sines,
//! - the publication whoosh is seeded white noise through a rising band-pass
//!   sweep,
//! - the open-access marker is a sub-bass sine gliding down exponentially.
//!
//! Events are rendered independently (in parallel), then summed in event
//! order so the result does not depend on the thread count.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::wav;
use crate::mapping::MappingSchema;
use crate::sequencing::{EventKind, SonicEvent, Timeline};

pub const MIN_TONE_HZ: f64 = 20.0;
pub const MAX_TONE_HZ: f64 = 20_000.0;

/// Mono audio with samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
}

impl AudioBuffer {
    pub fn peak(&self) -> f64 {
        peak(&self.samples)
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Attack/decay/sustain/release amplitude shape, times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub attack: f64,
    pub decay: f64,
    pub sustain: f64,
    pub release: f64,
}

impl Default for Envelope {
    fn default() -> Self {
        Self {
            attack: 0.01,
            decay: 0.05,
            sustain: 0.7,
            release: 0.1,
        }
    }
}

impl Envelope {
    pub fn validate(&self, duration: f64) -> Result<()> {
        let times = [self.attack, self.decay, self.release];
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config(format!(
                "envelope times must be non-negative: {self:?}"
            )));
        }
        if !(0.0..=1.0).contains(&self.sustain) {
            return Err(Error::Config(format!(
                "sustain level {} is outside [0, 1]",
                self.sustain
            )));
        }
        if self.attack + self.decay + self.release > duration + 1e-12 {
            return Err(Error::Config(format!(
                "envelope ({} s) is longer than the {duration} s event",
                self.attack + self.decay + self.release
            )));
        }
        Ok(())
    }

    /// Level at `t` seconds into an event lasting `duration` seconds.
    pub fn level(&self, t: f64, duration: f64) -> f64 {
        let release_start = duration - self.release;
        if t <= 0.0 || t >= duration {
            0.0
        } else if t < self.attack {
            t / self.attack
        } else if t < self.attack + self.decay {
            1.0 - (1.0 - self.sustain) * (t - self.attack) / self.decay
        } else if t < release_start {
            self.sustain
        } else if self.release > 0.0 {
            self.sustain * (duration - t) / self.release
        } else {
            self.sustain
        }
    }
}

/// Per-kind sound parameters used by [`render`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EventSounds {
    pub tone_envelope: Envelope,
    pub tone_level: f64,
    pub whoosh_level: f64,
    /// Band-pass centre at the start of the whoosh.
    pub whoosh_low_hz: f64,
    /// Band-pass centre at the end of the whoosh.
    pub whoosh_high_hz: f64,
    pub whoosh_q: f64,
    pub oa_level: f64,
    pub oa_start_hz: f64,
    pub oa_end_hz: f64,
    /// Mixes peaking above this are scaled down to it.
    pub normalize_ceiling: f64,
}

impl Default for EventSounds {
    fn default() -> Self {
        Self {
            tone_envelope: Envelope::default(),
            tone_level: 0.5,
            whoosh_level: 0.35,
            whoosh_low_hz: 800.0,
            whoosh_high_hz: 4000.0,
            whoosh_q: 1.0,
            oa_level: 0.7,
            oa_start_hz: 80.0,
            oa_end_hz: 40.0,
            normalize_ceiling: 0.9,
        }
    }
}

impl EventSounds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tone_level", self.tone_level),
            ("whoosh_level", self.whoosh_level),
            ("oa_level", self.oa_level),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("`{name}` {v} is outside [0, 1]")));
            }
        }
        if !(self.normalize_ceiling > 0.0 && self.normalize_ceiling <= 1.0) {
            return Err(Error::Config(format!(
                "normalize ceiling {} is outside (0, 1]",
                self.normalize_ceiling
            )));
        }
        for (name, v) in [
            ("whoosh_low_hz", self.whoosh_low_hz),
            ("whoosh_high_hz", self.whoosh_high_hz),
            ("whoosh_q", self.whoosh_q),
            ("oa_start_hz", self.oa_start_hz),
            ("oa_end_hz", self.oa_end_hz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("`{name}` must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

fn sample_count(duration: f64, sample_rate: u32) -> usize {
    (duration * sample_rate as f64).round() as usize
}

/// Envelope time of sample `i` of `n`, stretched so the last sample lands on
/// the end of the event.
fn envelope_time(i: usize, n: usize, duration: f64) -> f64 {
    if n < 2 {
        0.0
    } else {
        i as f64 * duration / (n - 1) as f64
    }
}

pub fn peak(samples: &[f64]) -> f64 {
    samples.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// An enveloped sine.
pub fn render_tone(freq: f64, duration: f64, env: &Envelope, sample_rate: u32) -> Result<Vec<f64>> {
    if !(MIN_TONE_HZ..=MAX_TONE_HZ).contains(&freq) {
        return Err(Error::Domain(format!(
            "tone frequency {freq} Hz is outside {MIN_TONE_HZ}..={MAX_TONE_HZ} Hz"
        )));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::Domain(format!(
            "tone duration {duration} must be positive"
        )));
    }
    env.validate(duration)?;
    let n = sample_count(duration, sample_rate);
    let sr = sample_rate as f64;
    Ok((0..n)
        .map(|i| {
            let amp = env.level(envelope_time(i, n, duration), duration);
            amp * (2.0 * PI * freq * i as f64 / sr).sin()
        })
        .collect())
}

/// RBJ band-pass biquad (0 dB peak gain), direct form I.
#[derive(Default)]
struct BandPass {
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
}

impl BandPass {
    fn process(&mut self, x: f64, centre: f64, q: f64, sample_rate: f64) -> f64 {
        let w0 = 2.0 * PI * centre / sample_rate;
        let alpha = w0.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        let y =
            (alpha * x - alpha * self.x2 + 2.0 * w0.cos() * self.y1 - (1.0 - alpha) * self.y2) / a0;
        self.x2 = self.x1;
        self.x1 = x;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// Seeded band-passed noise burst with the default sweep, peak 1.
pub fn render_whoosh(duration: f64, seed: u64, sample_rate: u32) -> Vec<f64> {
    render_whoosh_with(duration, seed, sample_rate, &EventSounds::default())
}

pub fn render_whoosh_with(
    duration: f64,
    seed: u64,
    sample_rate: u32,
    sounds: &EventSounds,
) -> Vec<f64> {
    let n = sample_count(duration, sample_rate);
    let sr = sample_rate as f64;
    let nyquist_guard = 0.45 * sr;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut stage1, mut stage2) = (BandPass::default(), BandPass::default());
    let ratio = sounds.whoosh_high_hz / sounds.whoosh_low_hz;

    let mut out: Vec<f64> = (0..n)
        .map(|i| {
            let noise = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
            let pos = if n > 1 {
                i as f64 / (n - 1) as f64
            } else {
                0.0
            };
            let centre = (sounds.whoosh_low_hz * ratio.powf(pos)).min(nyquist_guard);
            let y = stage1.process(noise, centre, sounds.whoosh_q, sr);
            let y = stage2.process(y, centre, sounds.whoosh_q, sr);
            // Hann fade in and out.
            y * (PI * pos).sin().powi(2)
        })
        .collect();

    let p = peak(&out);
    if p > 0.0 {
        out.iter_mut().for_each(|x| *x /= p);
    }
    out
}

/// Sub-bass sine gliding from 80 Hz down to 40 Hz, peak ≤ 1.
pub fn render_oa_drop(duration: f64, sample_rate: u32) -> Vec<f64> {
    render_oa_drop_with(duration, sample_rate, &EventSounds::default())
}

pub fn render_oa_drop_with(duration: f64, sample_rate: u32, sounds: &EventSounds) -> Vec<f64> {
    const FADE_IN: f64 = 0.010;
    const FADE_OUT: f64 = 0.010;
    let n = sample_count(duration, sample_rate);
    let sr = sample_rate as f64;
    let f0 = sounds.oa_start_hz;
    let ln_ratio = (sounds.oa_end_hz / f0).ln();

    (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            // Integral of f0 * r^(t / T).
            let phase = if ln_ratio.abs() < 1e-12 {
                2.0 * PI * f0 * t
            } else {
                2.0 * PI * f0 * duration / ln_ratio * ((ln_ratio * t / duration).exp() - 1.0)
            };
            let te = envelope_time(i, n, duration);
            let mut amp = (-2.0 * te / duration).exp();
            if te < FADE_IN {
                amp *= (0.5 - 0.5 * (PI * te / FADE_IN).cos()).max(0.0);
            }
            let left = duration - te;
            if left < FADE_OUT {
                amp *= (0.5 - 0.5 * (PI * left / FADE_OUT).cos()).max(0.0);
            }
            amp * phase.sin()
        })
        .collect()
}

/// Stateless 64-bit mixer used to derive per-event seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn event_seed(master_seed: u64, index: usize) -> u64 {
    splitmix64(master_seed ^ splitmix64(index as u64))
}

/// Renders one event, level and gain applied. `None` for silent events.
pub fn render_event(
    event: &SonicEvent,
    index: usize,
    schema: &MappingSchema,
    master_seed: u64,
    sample_rate: u32,
) -> Result<Option<Vec<f64>>> {
    let sounds = &schema.event_sounds;
    let (samples, level) = match &event.kind {
        EventKind::ClassMarker { .. } => return Ok(None),
        EventKind::ImpactTone { freq, .. } => (
            render_tone(*freq, event.duration, &sounds.tone_envelope, sample_rate)?,
            sounds.tone_level,
        ),
        EventKind::PubWhoosh => (
            render_whoosh_with(
                event.duration,
                event_seed(master_seed, index),
                sample_rate,
                sounds,
            ),
            sounds.whoosh_level,
        ),
        EventKind::OaDrop => (
            render_oa_drop_with(event.duration, sample_rate, sounds),
            sounds.oa_level,
        ),
        EventKind::ExternalInsert { path } => {
            let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let buf = wav::read_wav(&raw).map_err(|e| match e {
                Error::Format(message) => Error::io(
                    path,
                    std::io::Error::new(std::io::ErrorKind::InvalidData, message),
                ),
                other => other,
            })?;
            if buf.sample_rate != sample_rate {
                return Err(Error::Config(format!(
                    "{} is {} Hz but the timeline is {} Hz",
                    path.display(),
                    buf.sample_rate,
                    sample_rate
                )));
            }
            (buf.samples, 1.0)
        }
    };
    let scale = level * event.gain;
    Ok(Some(samples.into_iter().map(|x| x * scale).collect()))
}

/// The raw sum of all events before normalization.
pub fn mix(timeline: &Timeline, schema: &MappingSchema, master_seed: u64) -> Result<Vec<f64>> {
    let sr = timeline.sample_rate;
    let rendered: Vec<Option<Vec<f64>>> = timeline
        .events
        .par_iter()
        .enumerate()
        .map(|(i, e)| render_event(e, i, schema, master_seed, sr))
        .collect::<Result<_>>()?;

    let mut out = vec![0.0; timeline.sample_len()];
    for (event, samples) in timeline.events.iter().zip(rendered) {
        let Some(samples) = samples else { continue };
        let start = (event.onset * sr as f64).round() as usize;
        if start >= out.len() {
            continue;
        }
        for (dst, src) in out[start..].iter_mut().zip(samples) {
            *dst += src;
        }
    }
    Ok(out)
}

/// Renders and peak-normalizes a timeline. The result is a pure function of
/// the inputs; see [`render_with_threads`] for an explicit thread count.
pub fn render(
    timeline: &Timeline,
    schema: &MappingSchema,
    master_seed: u64,
) -> Result<AudioBuffer> {
    let mut samples = mix(timeline, schema, master_seed)?;
    let ceiling = schema.event_sounds.normalize_ceiling;
    let p = peak(&samples);
    if p > ceiling {
        let scale = ceiling / p;
        samples.iter_mut().for_each(|x| *x *= scale);
    }
    Ok(AudioBuffer {
        sample_rate: timeline.sample_rate,
        samples,
    })
}

pub fn render_with_threads(
    timeline: &Timeline,
    schema: &MappingSchema,
    master_seed: u64,
    threads: usize,
) -> Result<AudioBuffer> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| render(timeline, schema, master_seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tone_length_and_clickless_edges() {
        let s = render_tone(440.0, 1.0, &Envelope::default(), 44_100).unwrap();
        assert_eq!(s.len(), 44_100);
        assert!(s[0].abs() < 1e-3);
        assert!(s[s.len() - 1].abs() < 1e-3);

        let env = Envelope {
            attack: 0.01,
            ..Envelope::default()
        };
        let s = render_tone(415.3, 0.4, &env, 44_100).unwrap();
        assert!(s[0].abs() < 1e-3 && s.last().unwrap().abs() < 1e-3);
    }

    #[test]
    fn tone_is_deterministic_and_bounded() {
        let a = render_tone(622.25, 0.4, &Envelope::default(), 44_100).unwrap();
        let b = render_tone(622.25, 0.4, &Envelope::default(), 44_100).unwrap();
        assert_eq!(a, b);
        assert!(peak(&a) <= 1.0);
    }

    #[test]
    fn tone_domain_errors() {
        let env = Envelope::default();
        assert!(matches!(
            render_tone(10.0, 1.0, &env, 44_100),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            render_tone(21_000.0, 1.0, &env, 44_100),
            Err(Error::Domain(_))
        ));
        assert!(render_tone(440.0, 0.0, &env, 44_100).is_err());
        assert!(
            render_tone(440.0, 0.1, &env, 44_100).is_err(),
            "envelope longer than event"
        );
    }

    #[test]
    fn envelope_shape() {
        let env = Envelope::default();
        assert_eq!(env.level(0.0, 1.0), 0.0);
        assert!((env.level(0.01, 1.0) - 1.0).abs() < 1e-9);
        assert!((env.level(0.5, 1.0) - 0.7).abs() < 1e-12);
        assert!((env.level(0.95, 1.0) - 0.35).abs() < 1e-9);
        assert_eq!(env.level(1.0, 1.0), 0.0);
        let bad = Envelope {
            sustain: 1.5,
            ..env
        };
        assert!(bad.validate(1.0).is_err());
    }

    #[test]
    fn whoosh_seeding() {
        let a = render_whoosh(0.35, 1, 44_100);
        let b = render_whoosh(0.35, 1, 44_100);
        let c = render_whoosh(0.35, 2, 44_100);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 15_435);
        assert!((peak(&a) - 1.0).abs() < 1e-12);
        assert_eq!(a[0], 0.0);
    }

    #[test]
    fn oa_drop_bounded_and_deterministic() {
        let a = render_oa_drop(0.5, 44_100);
        assert_eq!(a, render_oa_drop(0.5, 44_100));
        assert_eq!(a.len(), 22_050);
        assert!(peak(&a) <= 1.0);
        assert!(a[0].abs() < 1e-12 && a[a.len() - 1].abs() < 1e-12);
    }

    #[test]
    fn seeds_differ_per_event() {
        assert_ne!(event_seed(0, 0), event_seed(0, 1));
        assert_ne!(event_seed(0, 3), event_seed(1, 3));
        assert_eq!(event_seed(7, 3), event_seed(7, 3));
    }

    #[test]
    fn empty_timeline_renders_silence() {
        let t = Timeline::new(44_100, vec![], 1.0).unwrap();
        let buf = render(&t, &MappingSchema::default(), 0).unwrap();
        assert_eq!(buf.samples.len(), 44_100);
        assert!(buf.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn missing_insert_names_path() {
        let t = Timeline::insert("/nonexistent/drone.wav", 1.0, 44_100).unwrap();
        let err = render(&t, &MappingSchema::default(), 0).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/drone.wav"));
    }

    #[test]
    fn loud_mix_is_normalized() {
        let events: Vec<SonicEvent> = (0..6)
            .map(|_| {
                SonicEvent::new(
                    EventKind::ImpactTone {
                        class: 3,
                        note: 68,
                        freq: 415.3,
                    },
                    0.0,
                    0.4,
                )
            })
            .collect();
        let t = Timeline::new(44_100, events, 0.5).unwrap();
        let schema = MappingSchema::default();
        let raw = mix(&t, &schema, 0).unwrap();
        assert!(peak(&raw) > 0.9);
        let buf = render(&t, &schema, 0).unwrap();
        assert!((buf.peak() - 0.9).abs() < 1e-9);
    }
}
