//! Dataset registry and per-pair sidecar files.
//!
//! The registry is TOML with one `[[dataset]]` table per entry:
//!
//! ```toml
//! [[dataset]]
//! name = "asap"
//! stage = 2
//! input_kind = "score"
//! target_kind = "perf_audio"
//! instrumentation = "Piano"
//! root_path = "data/asap"
//! pair_index = "pairs.csv"   # relative to root_path
//! weight = 1.0               # optional, scales this dataset's share
//! ```
//!
//! The pair index is CSV with columns `midi,audio,metadata,alignment`; the
//! last two may be empty. All paths in it are relative to `root_path`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CurriculumError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    Score,
    Performance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    SynthAudio,
    PerfAudio,
    SynthPerfAudio,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    pub stage: u8,
    pub input_kind: InputKind,
    pub target_kind: TargetKind,
    pub instrumentation: String,
    pub root_path: PathBuf,
    pub pair_index: PathBuf,
    /// Share multiplier within a stage; 1.0 keeps every record once.
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

impl DatasetEntry {
    pub fn pair_index_path(&self) -> PathBuf {
        self.root_path.join(&self.pair_index)
    }

    /// Reads the pair index, resolving paths against `root_path` and sorting
    /// by MIDI path so results never depend on listing order.
    pub fn pairs(&self) -> Result<Vec<PairRecord>, CurriculumError> {
        let path = self.pair_index_path();
        let mut reader = csv::Reader::from_path(&path).map_err(|e| CurriculumError::csv(&path, e))?;
        let mut pairs = Vec::new();
        for row in reader.deserialize::<RawPair>() {
            let row = row.map_err(|e| CurriculumError::csv(&path, e))?;
            let resolve = |p: Option<String>| p.filter(|s| !s.trim().is_empty()).map(|s| self.root_path.join(s.trim()));
            pairs.push(PairRecord {
                rel_midi: row.midi.trim().to_string(),
                midi: self.root_path.join(row.midi.trim()),
                audio: self.root_path.join(row.audio.trim()),
                metadata: resolve(row.metadata),
                alignment: resolve(row.alignment),
            });
        }
        pairs.sort_by(|a, b| a.midi.cmp(&b.midi));
        Ok(pairs)
    }
}

#[derive(Debug, Deserialize)]
struct RawPair {
    midi: String,
    audio: String,
    #[serde(default)]
    metadata: Option<String>,
    #[serde(default)]
    alignment: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    /// MIDI path as written in the index; used in window references.
    pub rel_midi: String,
    pub midi: PathBuf,
    pub audio: PathBuf,
    pub metadata: Option<PathBuf>,
    pub alignment: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    #[serde(rename = "dataset", default)]
    pub datasets: Vec<DatasetEntry>,
}

impl Registry {
    pub fn from_toml(text: &str) -> Result<Self, CurriculumError> {
        let reg: Registry = toml::from_str(text).map_err(|e| CurriculumError::Registry(e.to_string()))?;
        for d in &reg.datasets {
            if d.stage > 4 {
                return Err(CurriculumError::Registry(format!("dataset {}: stage {} not in 0..=4", d.name, d.stage)));
            }
            if !(d.weight.is_finite() && d.weight > 0.0) {
                return Err(CurriculumError::Registry(format!("dataset {}: weight must be positive", d.name)));
            }
        }
        Ok(reg)
    }

    /// Loads a registry file; relative `root_path`s are resolved against the
    /// registry's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CurriculumError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CurriculumError::io(path, e))?;
        let mut reg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for d in &mut reg.datasets {
            if d.root_path.is_relative() {
                d.root_path = base.join(&d.root_path);
            }
        }
        Ok(reg)
    }

    pub fn for_stage(&self, stage: u8) -> impl Iterator<Item = &DatasetEntry> {
        self.datasets.iter().filter(move |d| d.stage == stage)
    }

    /// Checks that every file referenced by every pair index exists.
    pub fn validate(&self) -> Result<(), CurriculumError> {
        for d in &self.datasets {
            for p in d.pairs()? {
                let files = [Some(&p.midi), Some(&p.audio), p.metadata.as_ref(), p.alignment.as_ref()];
                if let Some(missing) = files.into_iter().flatten().find(|f| !f.exists()) {
                    return Err(CurriculumError::MissingFile {
                        dataset: d.name.clone(),
                        path: missing.display().to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Per-piece metadata sidecar (JSON); every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PieceMetadata {
    pub title: Option<String>,
    pub composer: Option<String>,
    pub instrumentation: Option<String>,
    pub performer: Option<String>,
    pub expression_label: Option<String>,
}

/// One aligned window: the score window starting at `score_offset` maps to
/// performance audio `perf_start..perf_end` (seconds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignedWindow {
    pub score_offset: f64,
    pub perf_start: f64,
    pub perf_end: f64,
}

/// Alignment sidecar: `{"windows": [{"score_offset", "perf_start", "perf_end"}, ...]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub windows: Vec<AlignedWindow>,
}

impl Alignment {
    /// Interval for the score window at `offset` (matched within 1 ms).
    pub fn lookup(&self, offset: f64) -> Option<&AlignedWindow> {
        self.windows.iter().find(|w| (w.score_offset - offset).abs() < 1e-3)
    }
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CurriculumError> {
    let text = std::fs::read_to_string(path).map_err(|e| CurriculumError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CurriculumError::Sidecar {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_registry_with_defaults() {
        let reg = Registry::from_toml(
            r#"
            [[dataset]]
            name = "a"
            stage = 0
            input_kind = "score"
            target_kind = "synth_audio"
            instrumentation = "Piano"
            root_path = "x"
            pair_index = "pairs.csv"

            [[dataset]]
            name = "b"
            stage = 2
            input_kind = "score"
            target_kind = "perf_audio"
            instrumentation = "Violin"
            root_path = "y"
            pair_index = "pairs.csv"
            weight = 0.5
            "#,
        )
        .unwrap();
        assert_eq!(reg.datasets.len(), 2);
        assert_eq!(reg.datasets[0].weight, 1.0);
        assert_eq!(reg.for_stage(2).count(), 1);
        assert_eq!(reg.datasets[1].target_kind, TargetKind::PerfAudio);
    }

    #[test]
    fn rejects_bad_stage_and_weight() {
        let base = |extra: &str| {
            format!(
                "[[dataset]]\nname='a'\ninput_kind='score'\ntarget_kind='synth_audio'\ninstrumentation='P'\nroot_path='x'\npair_index='p.csv'\n{extra}"
            )
        };
        assert!(Registry::from_toml(&base("stage = 5")).is_err());
        assert!(Registry::from_toml(&base("stage = 1\nweight = 0.0")).is_err());
        assert!(Registry::from_toml(&base("stage = 1")).is_ok());
    }

    #[test]
    fn pair_index_is_sorted_and_resolved() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("pairs.csv"), "midi,audio,metadata,alignment\nb.mid,b.wav,,\na.mid,a.wav,a.json,a.align.json\n").unwrap();
        let entry = DatasetEntry {
            name: "d".into(),
            stage: 2,
            input_kind: InputKind::Score,
            target_kind: TargetKind::PerfAudio,
            instrumentation: "Piano".into(),
            root_path: dir.path().to_path_buf(),
            pair_index: "pairs.csv".into(),
            weight: 1.0,
        };
        let pairs = entry.pairs().unwrap();
        assert_eq!(pairs[0].rel_midi, "a.mid");
        assert_eq!(pairs[0].alignment, Some(dir.path().join("a.align.json")));
        assert_eq!(pairs[1].metadata, None);
        let reg = Registry { datasets: vec![entry] };
        assert!(matches!(reg.validate(), Err(CurriculumError::MissingFile { .. })));
    }

    #[test]
    fn alignment_lookup_tolerance() {
        let a: Alignment =
            serde_json::from_str(r#"{"windows":[{"score_offset":10.0,"perf_start":12.0,"perf_end":29.0}]}"#).unwrap();
        assert_eq!(a.lookup(10.0004).unwrap().perf_end, 29.0);
        assert!(a.lookup(0.0).is_none());
    }
}
