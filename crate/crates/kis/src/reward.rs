//! Composite reward: normalize each enabled component to [0, 1], multiply,
//! and zero the product when any guardrail triggers.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{KisError, Result};
use crate::fluency::{lm_score, Discriminator, LanguageModel};
use crate::guardrails::{brevity, inaccuracy, BrevityBounds, GuardrailVerdict};
use crate::salience::{coverage, CoverageModel};
use crate::simplicity::{delta_z, fkgl, l_score, s_score, target_delta, SimplicityConfig, ZipfTable};
use crate::textproc::{extract_entities, tokenize, StopwordList, TokenizedText};

/// Ablation switches; mirror the reward's three component groups.
#[derive(Debug, Clone, Copy)]
pub struct ComponentToggles {
    pub use_simplicity: bool,
    pub use_fluency: bool,
    pub use_salience: bool,
}

impl Default for ComponentToggles {
    fn default() -> Self {
        Self {
            use_simplicity: true,
            use_fluency: true,
            use_salience: true,
        }
    }
}

impl ComponentToggles {
    pub fn any_enabled(&self) -> bool {
        self.use_simplicity || self.use_fluency || self.use_salience
    }
}

/// Everything `score_pair` needs: calibration constants, toggles, and the
/// pluggable models. Immutable during a scoring run; clones share models.
#[derive(Clone)]
pub struct ScoreConfig {
    pub lambda: f64,
    pub simplicity: SimplicityConfig,
    pub brevity_bounds: BrevityBounds,
    pub toggles: ComponentToggles,
    pub stopwords: Arc<StopwordList>,
    pub zipf: Arc<ZipfTable>,
    pub lm: Arc<dyn LanguageModel>,
    /// None before the first discriminator retrain; the d_score factor is
    /// then omitted rather than pinned at 0.5.
    pub discriminator: Option<Arc<Discriminator>>,
    pub coverage_model: Arc<dyn CoverageModel>,
}

impl ScoreConfig {
    /// Bundled stopwords, lexicon, and CopyCloze around a caller-supplied LM.
    pub fn with_lm(lm: Arc<dyn LanguageModel>) -> Self {
        Self {
            lambda: 1.3,
            simplicity: SimplicityConfig::default(),
            brevity_bounds: BrevityBounds::default(),
            toggles: ComponentToggles::default(),
            stopwords: Arc::new(StopwordList::bundled().clone()),
            zipf: Arc::new(ZipfTable::bundled().clone()),
            lm,
            discriminator: None,
            coverage_model: Arc::new(crate::salience::CopyCloze),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(KisError::InvalidConfig(format!(
                "lambda must be > 0, got {}",
                self.lambda
            )));
        }
        if !self.toggles.any_enabled() {
            return Err(KisError::InvalidConfig(
                "at least one reward component must be enabled".into(),
            ));
        }
        self.simplicity.validate()?;
        self.brevity_bounds.validate()
    }
}

/// Per-component scores; None marks a disabled (or unavailable) component.
#[derive(Debug, Clone, Copy, Default)]
pub struct Components {
    pub s_score: Option<f64>,
    pub l_score: Option<f64>,
    pub lm_score: Option<f64>,
    pub d_score: Option<f64>,
    pub coverage: Option<f64>,
}

impl Components {
    fn named(&self) -> [(&'static str, Option<f64>); 5] {
        [
            ("s_score", self.s_score),
            ("l_score", self.l_score),
            ("lm_score", self.lm_score),
            ("d_score", self.d_score),
            ("coverage", self.coverage),
        ]
    }
}

/// Full audit record for one (original, simplified) pair. Field order is
/// the serialization order and is stable.
#[derive(Debug, Clone, Serialize)]
pub struct RewardReport {
    pub s_score: Option<f64>,
    pub l_score: Option<f64>,
    pub lm_score: Option<f64>,
    pub d_score: Option<f64>,
    pub coverage: Option<f64>,
    pub guardrails: GuardrailVerdict,
    pub total: f64,
    pub fkgl_original: Option<f64>,
    pub fkgl_simplified: Option<f64>,
    pub target_delta: Option<f64>,
    pub delta_z: Option<f64>,
}

/// Product of the enabled components, zeroed when a guardrail triggered.
/// Components outside [0, 1] are rejected by name.
pub fn total_reward(components: &Components, guardrails: &GuardrailVerdict) -> Result<f64> {
    let mut product = 1.0;
    for (name, value) in components.named() {
        let Some(value) = value else { continue };
        if !(0.0..=1.0).contains(&value) || !value.is_finite() {
            return Err(KisError::ComponentOutOfRange { name, value });
        }
        product *= value;
    }
    if guardrails.all_pass() {
        Ok(product)
    } else {
        Ok(0.0)
    }
}

/// Score one pair end to end: tokenize, run every enabled component, apply
/// the guardrails, and multiply. Deterministic given a frozen config.
pub fn score_pair(original: &str, simplified: &str, cfg: &ScoreConfig) -> Result<RewardReport> {
    cfg.validate()?;
    let p = tokenize(original, &cfg.stopwords)?;
    let q = tokenize(simplified, &cfg.stopwords)?;
    score_tokenized(&p, &q, cfg)
}

/// `score_pair` over already-tokenized texts; the trainer's hot path.
pub fn score_tokenized(
    p: &TokenizedText,
    q: &TokenizedText,
    cfg: &ScoreConfig,
) -> Result<RewardReport> {
    let (brevity_verdict, compression) = brevity(p, q, &cfg.brevity_bounds)?;
    let e1 = extract_entities(p, &cfg.zipf);
    let e2 = extract_entities(q, &cfg.zipf);
    let (inaccuracy_verdict, novel) = inaccuracy(&e1, &e2);
    let guardrails = GuardrailVerdict {
        brevity: brevity_verdict,
        inaccuracy: inaccuracy_verdict,
        compression,
        novel_entities: novel.iter().map(str::to_string).collect(),
    };

    let mut components = Components::default();
    let mut audit = (None, None, None, None);
    if cfg.toggles.use_simplicity {
        let f_start = fkgl(p)?;
        let f_end = fkgl(q)?;
        let tgt = target_delta(f_start, &cfg.simplicity);
        components.s_score = Some(s_score(p, q, &cfg.simplicity)?);
        let dz = delta_z(&p.content_words(), &q.content_words(), &cfg.zipf);
        components.l_score = Some(l_score(
            &p.content_words(),
            &q.content_words(),
            &cfg.zipf,
            &cfg.simplicity,
        ));
        audit = (Some(f_start), Some(f_end), Some(tgt), Some(dz));
    }
    if cfg.toggles.use_fluency {
        components.lm_score = Some(lm_score(p, q, cfg.lm.as_ref(), cfg.lambda));
        components.d_score = cfg.discriminator.as_deref().map(|d| d.d_score(q));
    }
    if cfg.toggles.use_salience {
        components.coverage = Some(coverage(
            p,
            q,
            cfg.coverage_model.as_ref(),
            &cfg.stopwords,
        )?);
    }

    let total = total_reward(&components, &guardrails)?;
    Ok(RewardReport {
        s_score: components.s_score,
        l_score: components.l_score,
        lm_score: components.lm_score,
        d_score: components.d_score,
        coverage: components.coverage,
        guardrails,
        total,
        fkgl_original: audit.0,
        fkgl_simplified: audit.1,
        target_delta: audit.2,
        delta_z: audit.3,
    })
}
