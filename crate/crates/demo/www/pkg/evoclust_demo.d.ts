/* tslint:disable */
/* eslint-disable */

/**
 * Result of one clustering run.
 */
export class Clustering {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly assignment: Uint32Array;
    /**
     * Final centers, flat.
     */
    readonly centers: Float64Array;
    readonly jc: number;
    /**
     * The K′ centers before merging; empty for the unrefined algorithms.
     */
    readonly working: Float64Array;
}

export function cluster(points: Float64Array, algorithm: string, k: number, k_prime: number, seed: bigint): Clustering;

export function compare(points: Float64Array, k: number, k_prime: number, trials: number, seed: bigint): Float64Array;

export function generateBlobs(k: number, n: number, spread: number, seed: bigint): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_clustering_free: (a: number, b: number) => void;
    readonly cluster: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number];
    readonly clustering_assignment: (a: number) => [number, number];
    readonly clustering_centers: (a: number) => [number, number];
    readonly clustering_jc: (a: number) => number;
    readonly clustering_working: (a: number) => [number, number];
    readonly compare: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly generateBlobs: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
