/** Backend selection: the wasm kernels are an order of magnitude faster
 * than the plain JS cpu backend and ship inside the npm package, so they
 * are the default; anything else falls back to cpu. */

import * as tf from "@tensorflow/tfjs";

let initialized: Promise<string> | null = null;

export function initBackend(): Promise<string> {
  if (!initialized) {
    initialized = (async () => {
      try {
        await import("@tensorflow/tfjs-backend-wasm");
        await tf.setBackend("wasm");
      } catch (err) {
        console.error(`wasm backend unavailable, staying on ${tf.getBackend()}: ${err}`);
      }
      await tf.ready();
      return tf.getBackend();
    })();
  }
  return initialized;
}
