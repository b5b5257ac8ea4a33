/* tslint:disable */
/* eslint-disable */

/**
 * Detection efficiency at one pump rate with the threshold controller.
 */
export function efficiency(pump_rate: number, threshold: number, eta_g: number, background_rate: number, two_atom: boolean, injections: number, seed: number): string;

/**
 * Quasi-static sweep of the pump rate up from the vacuum and back down.
 */
export function hysteresis(gamma: number, phi0_over_pi: number, delta_phi_rel: number, r_min: number, r_max: number, points: number): string;

/**
 * One trajectory with a single photon injected at `injection`; ideal
 * detectors plus `background_rate` dark counts.
 */
export function trajectory(pump_rate: number, gamma: number, phi0_over_pi: number, delta_phi_rel: number, background_rate: number, injection: number, t_end: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly efficiency: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly hysteresis: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly trajectory: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
