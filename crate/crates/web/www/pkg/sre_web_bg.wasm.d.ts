/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_detcurve_free: (a: number, b: number) => void;
export const __wbg_scorercomparison_free: (a: number, b: number) => void;
export const __wbg_spectrogram_free: (a: number, b: number) => void;
export const compare_scorers: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
export const det_curve: (a: number, b: number, c: number, d: number) => [number, number, number];
export const detcurve_eer: (a: number) => number;
export const detcurve_far: (a: number) => [number, number];
export const detcurve_frr: (a: number) => [number, number];
export const detcurve_nontargets: (a: number) => [number, number];
export const detcurve_targets: (a: number) => [number, number];
export const detcurve_threshold: (a: number) => number;
export const event_spectrogram: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
export const gaussian_det: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const scorercomparison_cosine: (a: number) => number;
export const scorercomparison_lda: (a: number) => number;
export const scorercomparison_lda_dim: (a: number) => number;
export const scorercomparison_plda: (a: number) => number;
export const spectrogram_duration_s: (a: number) => number;
export const spectrogram_n_frames: (a: number) => number;
export const spectrogram_n_mels: (a: number) => number;
export const spectrogram_values: (a: number) => [number, number];
export const spectrogram_waveform: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
