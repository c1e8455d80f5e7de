/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_degrade: (a: number, b: bigint, c: number, d: number) => [number, number, number];
export const demo_height: (a: number) => number;
export const demo_iou_coarse: (a: number) => number;
export const demo_iou_refined: (a: number) => number;
export const demo_judge: (a: number, b: number) => [number, number, number, number];
export const demo_new: (a: bigint, b: number) => [number, number, number];
export const demo_overlay_rgba: (a: number, b: number) => [number, number];
export const demo_query_rgba: (a: number) => [number, number];
export const demo_refine: (a: number, b: number) => [number, number, number];
export const demo_support_rgba: (a: number) => [number, number];
export const demo_width: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
