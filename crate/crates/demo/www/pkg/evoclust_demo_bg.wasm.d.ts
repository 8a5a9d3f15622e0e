/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_clustering_free: (a: number, b: number) => void;
export const cluster: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number];
export const clustering_assignment: (a: number) => [number, number];
export const clustering_centers: (a: number) => [number, number];
export const clustering_jc: (a: number) => number;
export const clustering_working: (a: number) => [number, number];
export const compare: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
export const generateBlobs: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
