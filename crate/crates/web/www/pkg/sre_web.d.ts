/* tslint:disable */
/* eslint-disable */

/**
 * DET sweep with the equal error rate marked.
 */
export class DetCurve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly eer: number;
    readonly far: Float64Array;
    readonly frr: Float64Array;
    readonly nontargets: Float64Array;
    readonly targets: Float64Array;
    readonly threshold: number;
}

/**
 * EERs of the three back-ends on one simulated embedding population.
 */
export class ScorerComparison {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly cosine: number;
    readonly lda: number;
    readonly lda_dim: number;
    readonly plda: number;
}

/**
 * Log-mel filterbank of one synthetic event, frames × mels, row-major.
 */
export class Spectrogram {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly duration_s: number;
    readonly n_frames: number;
    readonly n_mels: number;
    readonly values: Float32Array;
    readonly waveform: Float32Array;
}

export function compare_scorers(n_speakers: number, utts_per_speaker: number, dim: number, nuisance_sd: number, within_sd: number, seed: bigint): ScorerComparison;

/**
 * DET of user-supplied scores.
 */
export function det_curve(targets: Float64Array, nontargets: Float64Array): DetCurve;

export function event_spectrogram(event: string, speaker: number, take: number, seed: bigint, n_mels: number): Spectrogram;

/**
 * Gaussian target/non-target scores with means `separation` apart.
 */
export function gaussian_det(n_target: number, n_nontarget: number, separation: number, seed: bigint): DetCurve;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_detcurve_free: (a: number, b: number) => void;
    readonly __wbg_scorercomparison_free: (a: number, b: number) => void;
    readonly __wbg_spectrogram_free: (a: number, b: number) => void;
    readonly compare_scorers: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
    readonly det_curve: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly detcurve_eer: (a: number) => number;
    readonly detcurve_far: (a: number) => [number, number];
    readonly detcurve_frr: (a: number) => [number, number];
    readonly detcurve_nontargets: (a: number) => [number, number];
    readonly detcurve_targets: (a: number) => [number, number];
    readonly detcurve_threshold: (a: number) => number;
    readonly event_spectrogram: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
    readonly gaussian_det: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly scorercomparison_cosine: (a: number) => number;
    readonly scorercomparison_lda: (a: number) => number;
    readonly scorercomparison_lda_dim: (a: number) => number;
    readonly scorercomparison_plda: (a: number) => number;
    readonly spectrogram_duration_s: (a: number) => number;
    readonly spectrogram_n_frames: (a: number) => number;
    readonly spectrogram_n_mels: (a: number) => number;
    readonly spectrogram_values: (a: number) => [number, number];
    readonly spectrogram_waveform: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
