/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_diskrun_free: (a: number, b: number) => void;
export const __wbg_ringsclustering_free: (a: number, b: number) => void;
export const __wbg_transportcomparison_free: (a: number, b: number) => void;
export const cluster_rings: (a: number, b: number, c: bigint) => [number, number, number];
export const compare_transport: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const diskrun_image: (a: number) => [number, number];
export const diskrun_iou: (a: number) => number;
export const diskrun_losses: (a: number) => [number, number];
export const diskrun_map: (a: number) => [number, number];
export const diskrun_mask: (a: number) => [number, number];
export const diskrun_size: (a: number) => number;
export const diskrun_threshold: (a: number) => number;
export const diskrun_truth: (a: number) => [number, number];
export const ringsclustering_kmeans: (a: number) => [number, number];
export const ringsclustering_points: (a: number) => [number, number];
export const ringsclustering_spectral: (a: number) => [number, number];
export const ringsclustering_truth: (a: number) => [number, number];
export const segment_disk: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number];
export const transportcomparison_cols: (a: number) => number;
export const transportcomparison_converged: (a: number) => number;
export const transportcomparison_exact: (a: number) => [number, number];
export const transportcomparison_exact_objective: (a: number) => number;
export const transportcomparison_iterations: (a: number) => number;
export const transportcomparison_objective: (a: number) => number;
export const transportcomparison_plan: (a: number) => [number, number];
export const transportcomparison_rows: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
