//! Browser demo bindings.
//!
//! Each export has a plain Rust counterpart in [`demo`] so the numbers can be
//! tested natively; the wasm wrappers only copy results into JS-friendly
//! shapes.

use wasm_bindgen::prelude::*;

pub mod demo;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Log-mel filterbank of one synthetic event, frames × mels, row-major.
#[wasm_bindgen]
pub struct Spectrogram {
    n_frames: usize,
    n_mels: usize,
    duration_s: f64,
    values: Vec<f32>,
    waveform: Vec<f32>,
}

#[wasm_bindgen]
impl Spectrogram {
    #[wasm_bindgen(getter)]
    pub fn n_frames(&self) -> usize {
        self.n_frames
    }
    #[wasm_bindgen(getter)]
    pub fn n_mels(&self) -> usize {
        self.n_mels
    }
    #[wasm_bindgen(getter)]
    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f32> {
        self.values.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn waveform(&self) -> Vec<f32> {
        self.waveform.clone()
    }
}

#[wasm_bindgen]
pub fn event_spectrogram(event: &str, speaker: usize, take: usize, seed: u64, n_mels: usize) -> Result<Spectrogram, JsError> {
    let s = demo::event_spectrogram(event, speaker, take, seed, n_mels).map_err(js_err)?;
    Ok(Spectrogram {
        n_frames: s.features.n_frames(),
        n_mels: s.features.dim(),
        duration_s: s.clip.duration_s(),
        values: s.features.values().iter().map(|&v| v as f32).collect(),
        waveform: s.clip.samples.iter().map(|&v| v as f32).collect(),
    })
}

/// DET sweep with the equal error rate marked.
#[wasm_bindgen]
pub struct DetCurve {
    eer: f64,
    threshold: f64,
    far: Vec<f64>,
    frr: Vec<f64>,
    targets: Vec<f64>,
    nontargets: Vec<f64>,
}

#[wasm_bindgen]
impl DetCurve {
    #[wasm_bindgen(getter)]
    pub fn eer(&self) -> f64 {
        self.eer
    }
    #[wasm_bindgen(getter)]
    pub fn threshold(&self) -> f64 {
        self.threshold
    }
    #[wasm_bindgen(getter)]
    pub fn far(&self) -> Vec<f64> {
        self.far.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn frr(&self) -> Vec<f64> {
        self.frr.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn targets(&self) -> Vec<f64> {
        self.targets.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn nontargets(&self) -> Vec<f64> {
        self.nontargets.clone()
    }
}

/// Gaussian target/non-target scores with means `separation` apart.
#[wasm_bindgen]
pub fn gaussian_det(n_target: usize, n_nontarget: usize, separation: f64, seed: u64) -> Result<DetCurve, JsError> {
    let (tar, non) = demo::gaussian_scores(n_target, n_nontarget, separation, seed);
    det_from_scores(tar, non)
}

/// DET of user-supplied scores.
#[wasm_bindgen]
pub fn det_curve(targets: Vec<f64>, nontargets: Vec<f64>) -> Result<DetCurve, JsError> {
    det_from_scores(targets, nontargets)
}

fn det_from_scores(targets: Vec<f64>, nontargets: Vec<f64>) -> Result<DetCurve, JsError> {
    let r = sre_core::eval::eer_from_scores(&targets, &nontargets).map_err(js_err)?;
    Ok(DetCurve {
        eer: r.eer,
        threshold: r.threshold,
        far: r.det_points.iter().map(|p| p.far).collect(),
        frr: r.det_points.iter().map(|p| p.frr).collect(),
        targets,
        nontargets,
    })
}

/// EERs of the three back-ends on one simulated embedding population.
#[wasm_bindgen]
pub struct ScorerComparison {
    cosine: f64,
    lda: f64,
    plda: f64,
    lda_dim: usize,
}

#[wasm_bindgen]
impl ScorerComparison {
    #[wasm_bindgen(getter)]
    pub fn cosine(&self) -> f64 {
        self.cosine
    }
    #[wasm_bindgen(getter)]
    pub fn lda(&self) -> f64 {
        self.lda
    }
    #[wasm_bindgen(getter)]
    pub fn plda(&self) -> f64 {
        self.plda
    }
    #[wasm_bindgen(getter)]
    pub fn lda_dim(&self) -> usize {
        self.lda_dim
    }
}

#[wasm_bindgen]
pub fn compare_scorers(
    n_speakers: usize,
    utts_per_speaker: usize,
    dim: usize,
    nuisance_sd: f64,
    within_sd: f64,
    seed: u64,
) -> Result<ScorerComparison, JsError> {
    let p = demo::Population { n_speakers, utts_per_speaker, dim, nuisance_sd, within_sd, seed };
    let c = demo::compare_scorers(&p).map_err(js_err)?;
    Ok(ScorerComparison { cosine: c.cosine, lda: c.lda, plda: c.plda, lda_dim: c.lda_dim })
}
