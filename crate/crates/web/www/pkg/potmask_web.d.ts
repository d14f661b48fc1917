/* tslint:disable */
/* eslint-disable */

/**
 * Result of segmenting a synthetic disk.
 */
export class DiskRun {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Grey levels of the classifier response, for display.
     */
    readonly image: Uint8Array;
    readonly iou: number;
    /**
     * Consistency loss after each round.
     */
    readonly losses: Float64Array;
    readonly map: Uint8Array;
    readonly mask: Uint8Array;
    readonly size: number;
    readonly threshold: number;
    readonly truth: Uint8Array;
}

/**
 * Two concentric rings labelled by both clusterings.
 */
export class RingsClustering {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly kmeans: Uint32Array;
    /**
     * Interleaved `x, y` coordinates.
     */
    readonly points: Float64Array;
    readonly spectral: Uint32Array;
    readonly truth: Uint32Array;
}

/**
 * An entropic plan next to the exact one for the same random instance.
 */
export class TransportComparison {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly cols: number;
    readonly converged: boolean;
    readonly exact: Float64Array;
    readonly exact_objective: number;
    readonly iterations: number;
    readonly objective: number;
    /**
     * Row-major entropic plan.
     */
    readonly plan: Float64Array;
    readonly rows: number;
}

export function cluster_rings(per_ring: number, sigma: number, seed: bigint): RingsClustering;

export function compare_transport(rows: number, cols: number, epsilon: number, seed: bigint): TransportComparison;

/**
 * Builds a noisy disk and runs the whole pipeline on it.
 */
export function segment_disk(size: number, radius: number, noise: number, seed: bigint, rounds: number): DiskRun;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_diskrun_free: (a: number, b: number) => void;
    readonly __wbg_ringsclustering_free: (a: number, b: number) => void;
    readonly __wbg_transportcomparison_free: (a: number, b: number) => void;
    readonly cluster_rings: (a: number, b: number, c: bigint) => [number, number, number];
    readonly compare_transport: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly diskrun_image: (a: number) => [number, number];
    readonly diskrun_iou: (a: number) => number;
    readonly diskrun_losses: (a: number) => [number, number];
    readonly diskrun_map: (a: number) => [number, number];
    readonly diskrun_mask: (a: number) => [number, number];
    readonly diskrun_size: (a: number) => number;
    readonly diskrun_threshold: (a: number) => number;
    readonly diskrun_truth: (a: number) => [number, number];
    readonly ringsclustering_kmeans: (a: number) => [number, number];
    readonly ringsclustering_points: (a: number) => [number, number];
    readonly ringsclustering_spectral: (a: number) => [number, number];
    readonly ringsclustering_truth: (a: number) => [number, number];
    readonly segment_disk: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number];
    readonly transportcomparison_cols: (a: number) => number;
    readonly transportcomparison_converged: (a: number) => number;
    readonly transportcomparison_exact: (a: number) => [number, number];
    readonly transportcomparison_exact_objective: (a: number) => number;
    readonly transportcomparison_iterations: (a: number) => number;
    readonly transportcomparison_objective: (a: number) => number;
    readonly transportcomparison_plan: (a: number) => [number, number];
    readonly transportcomparison_rows: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
