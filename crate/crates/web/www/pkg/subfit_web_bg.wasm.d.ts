/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_cloud_points: (a: number) => [number, number];
export const demo_control_faces: (a: number) => [number, number];
export const demo_control_points: (a: number) => [number, number];
export const demo_energy_history: (a: number) => [number, number];
export const demo_field_slice: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_fit: (a: number, b: number) => [number, number, number];
export const demo_limit_faces: (a: number, b: number) => [number, number, number, number];
export const demo_limit_points: (a: number, b: number) => [number, number, number, number];
export const demo_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const demo_set_alpha: (a: number, b: number) => void;
export const demo_set_radius: (a: number, b: number) => void;
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
