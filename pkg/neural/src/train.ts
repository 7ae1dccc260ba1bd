/** Training loop: adam with gradient-norm clipping, cosine-annealing
 * restarts, teacher forcing for the autoregressive head, early stopping,
 * and optional validation by full game play through the engine's CLI.
 */

import * as tf from "@tensorflow/tfjs";
import { execSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { Sample } from "./data.js";
import { Checkpoint, Model, saveCheckpoint } from "./model.js";
import { Rng } from "./rng.js";

export interface TrainConfig {
  batchSize: number;
  learningRate: number;
  gradClip: number;
  restartEpochs: number; // cosine-annealing restart period
  patience: number; // epochs without improvement before stopping
  teacherForcing: number;
  epochs: number;
  seed: number;
  targetAccuracy?: number; // stop once train action accuracy reaches this
  accuracyEvery?: number; // epochs between train-accuracy evaluations
  validateData?: string; // dataset dir; enables engine-played validation
  validateSplit?: string;
  validateEvery?: number;
  pythonCmd?: string;
  serveScript?: string; // compiled cli.js used for validation serving
}

/** The published defaults; desk-scale runs override most of them. */
export const PAPER_TRAIN: TrainConfig = {
  batchSize: 256,
  learningRate: 1e-3,
  gradClip: 5.0,
  restartEpochs: 32,
  patience: 512,
  teacherForcing: 0.5,
  epochs: 10_000,
  seed: 0,
};

export interface EpochLog {
  epoch: number;
  loss: number;
  trainAcc: number;
  valEqAcc: number | null;
}

export interface TrainResult {
  model: Model;
  history: EpochLog[];
  bestLoss: number;
  finalAccuracy: number;
}

function cosineLr(base: number, epoch: number, restart: number): number {
  const t = epoch % restart;
  const min = base * 0.01;
  return min + 0.5 * (base - min) * (1 + Math.cos((Math.PI * t) / restart));
}

function clipByGlobalNorm(grads: Record<string, tf.Tensor>, maxNorm: number): Record<string, tf.Tensor> {
  const total = tf.sqrt(
    tf.addN(Object.values(grads).map((g) => tf.sum(tf.square(g)))),
  );
  const norm = total.dataSync()[0];
  total.dispose();
  if (norm <= maxNorm || norm === 0) return grads;
  const scale = maxNorm / norm;
  const out: Record<string, tf.Tensor> = {};
  for (const [name, g] of Object.entries(grads)) {
    out[name] = tf.mul(g, scale);
    g.dispose();
  }
  return out;
}

/** Exact-match action accuracy of the greedy head over the samples. */
export function actionAccuracy(model: Model, samples: Sample[]): number {
  if (samples.length === 0) return 0;
  return tf.tidy(() => {
    const n = model.config.actionLength;
    const ids = model.stateIds(samples.map((s) => s.state));
    const heads = model.forward(ids);
    const scores = heads.head1 ?? heads.head0;
    const sliced = tf.slice(scores, [0, 0, 0], [samples.length, n, -1]);
    const pred = tf.argMax(sliced, 2).arraySync() as number[][];
    let hits = 0;
    samples.forEach((sample, i) => {
      const tokens = pred[i].map((id) => model.actionVocab.token(id));
      if (tokens.length === sample.action.length && tokens.every((t, j) => t === sample.action[j])) {
        hits++;
      }
    });
    return hits / samples.length;
  });
}

export function writeCheckpoint(model: Model, dir: string, history: EpochLog[]): void {
  fs.mkdirSync(dir, { recursive: true });
  const checkpoint: Checkpoint = saveCheckpoint(model);
  fs.writeFileSync(path.join(dir, "weights.json"), JSON.stringify(checkpoint));
  fs.writeFileSync(path.join(dir, "manifest.json"), JSON.stringify(model.manifest, null, 2));
  fs.writeFileSync(
    path.join(dir, "curve.jsonl"),
    history.map((entry) => JSON.stringify(entry)).join("\n") + (history.length ? "\n" : ""),
  );
}

/** Equation accuracy of this model served over the protocol, as judged by
 * the engine itself. */
export function engineEqAcc(model: Model, config: TrainConfig, history: EpochLog[]): number {
  const serveScript = config.serveScript ?? new URL("./cli.js", import.meta.url).pathname;
  const python = config.pythonCmd ?? "python3";
  const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "neural-val-"));
  try {
    const ckpt = path.join(tmp, "ckpt");
    writeCheckpoint(model, ckpt, history);
    const report = path.join(tmp, "report.json");
    const split = config.validateSplit ?? "valid";
    execSync(
      `${python} -m editgym eval --data ${config.validateData} --split ${split} ` +
        `--agent 'cmd:node ${serveScript} serve ${ckpt}' --report ${report}`,
      { stdio: ["ignore", "ignore", "inherit"] },
    );
    return JSON.parse(fs.readFileSync(report, "utf-8")).eq_acc as number;
  } finally {
    fs.rmSync(tmp, { recursive: true, force: true });
  }
}

export async function trainModel(
  model: Model,
  samples: Sample[],
  config: TrainConfig,
  outDir?: string,
): Promise<TrainResult> {
  const rng = new Rng(config.seed * 7919 + 17);
  const optimizer = tf.train.adam(config.learningRate);
  const variables = model.variables();
  const history: EpochLog[] = [];
  let bestLoss = Infinity;
  let bestMetric = -Infinity;
  let sinceImprovement = 0;
  let accuracy = 0;

  const stateTensor = model.stateIds(samples.map((s) => s.state));
  const goldTensor = model.actionIds(samples.map((s) => s.action));
  const states = tf.unstack(stateTensor) as tf.Tensor1D[];
  const golds = tf.unstack(goldTensor) as tf.Tensor1D[];

  for (let epoch = 0; epoch < config.epochs; epoch++) {
    const lr = cosineLr(config.learningRate, epoch, config.restartEpochs);
    (optimizer as unknown as { learningRate: number }).learningRate = lr;

    const order = rng.shuffle([...samples.keys()]);
    let epochLoss = 0;
    let batches = 0;
    for (let start = 0; start < order.length; start += config.batchSize) {
      const idx = order.slice(start, start + config.batchSize);
      const batchStates = tf.stack(idx.map((i) => states[i])) as tf.Tensor2D;
      const batchGold = tf.stack(idx.map((i) => golds[i])) as tf.Tensor2D;
      const { value, grads } = tf.variableGrads(
        () =>
          model.loss(
            model.forward(batchStates, {
              training: true,
              teacher: batchGold,
              tfRate: config.teacherForcing,
              rng,
            }),
            batchGold,
          ),
        variables,
      );
      const clipped = clipByGlobalNorm(grads, config.gradClip);
      optimizer.applyGradients(clipped as unknown as { [name: string]: tf.Variable });
      epochLoss += value.dataSync()[0];
      value.dispose();
      Object.values(clipped).forEach((g) => g.dispose());
      batchStates.dispose();
      batchGold.dispose();
      batches++;
    }
    epochLoss /= Math.max(batches, 1);

    const accEvery = config.accuracyEvery ?? 1;
    const lastEpoch = epoch === config.epochs - 1;
    if (epoch % accEvery === 0 || lastEpoch) {
      accuracy = actionAccuracy(model, samples);
    }
    let valEqAcc: number | null = null;
    const every = config.validateEvery ?? 0;
    if (config.validateData && every > 0 && (epoch + 1) % every === 0) {
      valEqAcc = engineEqAcc(model, config, history);
    }
    history.push({ epoch, loss: epochLoss, trainAcc: accuracy, valEqAcc });

    const metric = valEqAcc ?? -epochLoss;
    if (metric > bestMetric) {
      bestMetric = metric;
      sinceImprovement = 0;
      if (outDir) writeCheckpoint(model, outDir, history);
    } else {
      sinceImprovement++;
    }
    bestLoss = Math.min(bestLoss, epochLoss);

    if (epoch % 20 === 0 || accuracy === 1) {
      console.error(
        `epoch ${epoch} loss ${epochLoss.toFixed(4)} acc ${accuracy.toFixed(3)} lr ${lr.toExponential(2)}` +
          (valEqAcc !== null ? ` valEq ${valEqAcc.toFixed(3)}` : ""),
      );
    }
    if (config.targetAccuracy !== undefined && accuracy >= config.targetAccuracy) break;
    if (sinceImprovement > config.patience) break;
    // let the event loop breathe between epochs (timers, test-runner rpc)
    await new Promise((resolve) => setImmediate(resolve));
  }

  states.forEach((t) => t.dispose());
  golds.forEach((t) => t.dispose());
  stateTensor.dispose();
  goldTensor.dispose();
  if (outDir) writeCheckpoint(model, outDir, history);
  return { model, history, bestLoss, finalAccuracy: accuracy };
}
