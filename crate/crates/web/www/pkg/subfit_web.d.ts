/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    cloud_points(): Float64Array;
    control_faces(): Uint32Array;
    control_points(): Float64Array;
    energy_history(): Float64Array;
    /**
     * Signed distance of the cloud's implicit surface on a `res`×`res` grid
     * over the unit square at height `z`, row-major with `y` down. NaN marks
     * cells with no point within the support radius.
     */
    field_slice(res: number, z: number): Float64Array;
    /**
     * Runs up to `iters` iterations from the current control mesh and
     * returns the final total energy.
     */
    fit(iters: number): number;
    limit_faces(level: number): Uint32Array;
    /**
     * Vertex positions of the limit surface refined `level` times.
     */
    limit_points(level: number): Float64Array;
    /**
     * An ellipsoid cloud and a level-1 icosphere control mesh inside it.
     */
    constructor(points: number, ax: number, ay: number, az: number, noise: number, seed: number);
    set_alpha(alpha: number): void;
    set_radius(h: number): void;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_cloud_points: (a: number) => [number, number];
    readonly demo_control_faces: (a: number) => [number, number];
    readonly demo_control_points: (a: number) => [number, number];
    readonly demo_energy_history: (a: number) => [number, number];
    readonly demo_field_slice: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_fit: (a: number, b: number) => [number, number, number];
    readonly demo_limit_faces: (a: number, b: number) => [number, number, number, number];
    readonly demo_limit_points: (a: number, b: number) => [number, number, number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly demo_set_alpha: (a: number, b: number) => void;
    readonly demo_set_radius: (a: number, b: number) => void;
    readonly __externref_table_alloc: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
