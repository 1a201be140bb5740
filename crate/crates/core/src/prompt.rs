//! Text prompt assembly from metadata fields.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{SpeedTier, MAX_RATIO, MIN_RATIO};
use crate::seed;

/// Dropout rate applied to title, composer and instrumentation by default.
pub const DEFAULT_DROPOUT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sonification {
    Synthesis,
    Performance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub sonification: Sonification,
    pub speed_keyword: Option<String>,
    pub title: Option<String>,
    pub composer: Option<String>,
    pub instrumentation: Option<String>,
    pub mistake: Option<bool>,
    pub performer: Option<String>,
    pub expression_label: Option<String>,
    pub stage: u8,
}

impl PromptSpec {
    pub fn new(stage: u8, sonification: Sonification) -> Self {
        Self {
            sonification,
            speed_keyword: None,
            title: None,
            composer: None,
            instrumentation: None,
            mistake: None,
            performer: None,
            expression_label: None,
            stage,
        }
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        if self.stage > 4 {
            return Err(PromptError::InvalidSpec(format!("stage {} is not in 0..=4", self.stage)));
        }
        if self.speed_keyword.is_some() && self.stage < 1 {
            return Err(PromptError::InvalidSpec("speed keyword requires stage >= 1".into()));
        }
        if self.mistake.is_some() && self.stage != 3 {
            return Err(PromptError::InvalidSpec("mistake flag is only valid in stage 3".into()));
        }
        if (self.performer.is_some() || self.expression_label.is_some()) && self.stage != 4 {
            return Err(PromptError::InvalidSpec(
                "performer and expression label are only valid in stage 4".into(),
            ));
        }
        Ok(())
    }
}

/// Literal strings used when rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptTemplates {
    /// The whole prompt in stage 0.
    pub stage0: String,
    pub synthesis: String,
    pub performance: String,
    /// Replaces the sonification descriptor when the mistake flag is set.
    pub mistake: String,
    pub performer_prefix: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            stage0: "Synthesis".into(),
            synthesis: "synthesis".into(),
            performance: "expressive performance".into(),
            mistake: "performance with mistakes".into(),
            performer_prefix: "style of ".into(),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PromptError {
    #[error("speed ratio must be positive and finite, got {0}")]
    BadRatio(f64),
    #[error("dropout must be a probability, got {0}")]
    BadDropout(f64),
    #[error("invalid prompt spec: {0}")]
    InvalidSpec(String),
}

/// Picks a keyword uniformly from the tier containing `ratio`.
///
/// Ratios outside `[0.4, 2.2]` are clamped to the nearest tier with a warning.
pub fn ratio_to_keyword(ratio: f64, rng_seed: u64) -> Result<&'static str, PromptError> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(PromptError::BadRatio(ratio));
    }
    let clamped = ratio.clamp(MIN_RATIO, MAX_RATIO);
    if clamped != ratio {
        log::warn!("speed ratio {ratio:.3} outside [{MIN_RATIO}, {MAX_RATIO}], using {clamped}");
    }
    let tier = SpeedTier::for_ratio(clamped).expect("clamped ratio lies in a tier");
    let mut rng = seed::rng(rng_seed);
    Ok(tier.keywords().choose(&mut rng).expect("tiers have keywords"))
}

pub fn render_prompt(spec: &PromptSpec, dropout: f64, rng_seed: u64) -> Result<String, PromptError> {
    render_prompt_with(spec, dropout, rng_seed, &PromptTemplates::default())
}

/// Renders the prompt as a comma-separated field list in seeded random order.
///
/// The sonification descriptor, speed keyword, performer and expression
/// label are always kept; title, composer and instrumentation are each
/// dropped with probability `dropout`. Stage 0 always renders the fixed
/// stage-0 prompt.
pub fn render_prompt_with(
    spec: &PromptSpec,
    dropout: f64,
    rng_seed: u64,
    templates: &PromptTemplates,
) -> Result<String, PromptError> {
    spec.validate()?;
    if !(0.0..=1.0).contains(&dropout) {
        return Err(PromptError::BadDropout(dropout));
    }
    if spec.stage == 0 {
        return Ok(templates.stage0.clone());
    }
    let mut rng = seed::rng(rng_seed);
    let descriptor = match (spec.mistake, spec.sonification) {
        (Some(true), _) => &templates.mistake,
        (_, Sonification::Synthesis) => &templates.synthesis,
        (_, Sonification::Performance) => &templates.performance,
    };
    let mut fields = vec![descriptor.clone()];
    if let Some(k) = &spec.speed_keyword {
        fields.push(k.clone());
    }
    for optional in [&spec.title, &spec.composer, &spec.instrumentation] {
        let keep = !rng.random_bool(dropout);
        if let (true, Some(v)) = (keep, optional) {
            fields.push(v.clone());
        }
    }
    if let Some(p) = &spec.performer {
        fields.push(format!("{}{p}", templates.performer_prefix));
    }
    if let Some(e) = &spec.expression_label {
        fields.push(e.clone());
    }
    fields.shuffle(&mut rng);
    Ok(fields.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fields(s: &str) -> Vec<String> {
        let mut v: Vec<String> = s.split(", ").map(str::to_string).collect();
        v.sort();
        v
    }

    fn sorted(v: &[&str]) -> Vec<String> {
        let mut v: Vec<String> = v.iter().map(|s| s.to_string()).collect();
        v.sort();
        v
    }

    #[test]
    fn keyword_examples() {
        for seed in 0..20 {
            assert!(["Considerably slower", "Moving slower"].contains(&ratio_to_keyword(1.7, seed).unwrap()));
            assert!(SpeedTier::Neutral.keywords().contains(&ratio_to_keyword(1.0, seed).unwrap()));
            assert!(["Notably faster", "Well beyond the original tempo"].contains(&ratio_to_keyword(0.5, seed).unwrap()));
        }
        assert!(SpeedTier::VerySlow.keywords().contains(&ratio_to_keyword(1.8, 0).unwrap()));
        assert!(SpeedTier::VerySlow.keywords().contains(&ratio_to_keyword(3.0, 0).unwrap()));
        assert!(SpeedTier::Fast.keywords().contains(&ratio_to_keyword(0.1, 0).unwrap()));
        assert_eq!(ratio_to_keyword(0.0, 0), Err(PromptError::BadRatio(0.0)));
        assert!(ratio_to_keyword(-2.0, 0).is_err());
    }

    #[test]
    fn stage0_is_constant() {
        let mut spec = PromptSpec::new(0, Sonification::Performance);
        spec.title = Some("Anything".into());
        for seed in 0..10 {
            assert_eq!(render_prompt(&spec, 0.5, seed).unwrap(), "Synthesis");
        }
    }

    #[test]
    fn stage2_example_fields() {
        let spec = PromptSpec {
            speed_keyword: Some("a bit slower".into()),
            composer: Some("Bach".into()),
            instrumentation: Some("Piano".into()),
            ..PromptSpec::new(2, Sonification::Performance)
        };
        for seed in 0..10 {
            let p = render_prompt(&spec, 0.0, seed).unwrap();
            assert_eq!(fields(&p), sorted(&["a bit slower", "expressive performance", "Bach", "Piano"]));
        }
    }

    #[test]
    fn stage4_example_fields() {
        let spec = PromptSpec {
            speed_keyword: Some("notably faster".into()),
            title: Some("Etude Op.25 No.11".into()),
            composer: Some("Chopin".into()),
            performer: Some("Vladimir Ashkenazy".into()),
            ..PromptSpec::new(4, Sonification::Performance)
        };
        let p = render_prompt(&spec, 0.0, 3).unwrap();
        assert_eq!(
            fields(&p),
            sorted(&[
                "expressive performance",
                "style of Vladimir Ashkenazy",
                "Etude Op.25 No.11",
                "Chopin",
                "notably faster"
            ])
        );
    }

    #[test]
    fn full_dropout_keeps_mandatory_only() {
        let spec = PromptSpec {
            speed_keyword: Some("Moving slower".into()),
            title: Some("T".into()),
            composer: Some("C".into()),
            instrumentation: Some("I".into()),
            mistake: Some(true),
            ..PromptSpec::new(3, Sonification::Performance)
        };
        let p = render_prompt(&spec, 1.0, 9).unwrap();
        assert_eq!(fields(&p), sorted(&["performance with mistakes", "Moving slower"]));
    }

    #[test]
    fn order_varies_with_seed_only() {
        let spec = PromptSpec {
            speed_keyword: Some("k".into()),
            title: Some("t".into()),
            composer: Some("c".into()),
            instrumentation: Some("i".into()),
            ..PromptSpec::new(2, Sonification::Performance)
        };
        assert_eq!(render_prompt(&spec, 0.0, 5), render_prompt(&spec, 0.0, 5));
        let distinct: std::collections::HashSet<String> =
            (0..50).map(|s| render_prompt(&spec, 0.0, s).unwrap()).collect();
        assert!(distinct.len() > 1);
    }

    #[test]
    fn invariant_violations() {
        let mut spec = PromptSpec::new(0, Sonification::Synthesis);
        spec.speed_keyword = Some("x".into());
        assert!(render_prompt(&spec, 0.5, 0).is_err());
        let mut spec = PromptSpec::new(2, Sonification::Performance);
        spec.mistake = Some(true);
        assert!(render_prompt(&spec, 0.5, 0).is_err());
        let mut spec = PromptSpec::new(3, Sonification::Performance);
        spec.performer = Some("p".into());
        assert!(render_prompt(&spec, 0.5, 0).is_err());
        assert!(render_prompt(&PromptSpec::new(5, Sonification::Performance), 0.5, 0).is_err());
        assert_eq!(
            render_prompt(&PromptSpec::new(1, Sonification::Synthesis), 1.5, 0),
            Err(PromptError::BadDropout(1.5))
        );
    }
}
