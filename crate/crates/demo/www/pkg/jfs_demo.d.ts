/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Redraws the coarse mask so its IoU with the truth lands in `[1 - hi, 1 - lo]`.
     * Returns that IoU.
     */
    degrade(seed: bigint, lo: number, hi: number): number;
    height(): number;
    iou_coarse(): number;
    iou_refined(): number;
    /**
     * Judges coarse against refined with spatial weight `lambda`.
     * Returns `{"e_coarse":..,"e_refined":..,"verdict":..}` as JSON text.
     */
    judge(lambda: number): string;
    /**
     * Builds a query and a support scene sharing `class_id` (1..=4).
     */
    constructor(seed: bigint, class_id: number);
    /**
     * Translucent overlay for `layer`; empty when a prediction is not computed yet.
     */
    overlay_rgba(layer: Layer): Uint8Array;
    query_rgba(): Uint8Array;
    /**
     * Refines the coarse mask with candidates covered at least `tau` by it.
     * Returns the refined IoU with the truth.
     */
    refine(tau: number): number;
    support_rgba(): Uint8Array;
    width(): number;
}

/**
 * Which mask an overlay shows.
 */
export enum Layer {
    Truth = 0,
    Coarse = 1,
    Refined = 2,
    SupportTruth = 3,
    PredFromCoarse = 4,
    PredFromRefined = 5,
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_degrade: (a: number, b: bigint, c: number, d: number) => [number, number, number];
    readonly demo_height: (a: number) => number;
    readonly demo_iou_coarse: (a: number) => number;
    readonly demo_iou_refined: (a: number) => number;
    readonly demo_judge: (a: number, b: number) => [number, number, number, number];
    readonly demo_new: (a: bigint, b: number) => [number, number, number];
    readonly demo_overlay_rgba: (a: number, b: number) => [number, number];
    readonly demo_query_rgba: (a: number) => [number, number];
    readonly demo_refine: (a: number, b: number) => [number, number, number];
    readonly demo_support_rgba: (a: number) => [number, number];
    readonly demo_width: (a: number) => number;
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
