/** The editing-policy models.
 *
 * One bidirectional recurrent encoder with attention feeds one of five
 * heads: an autoregressive decoder (ar), a linear projection over the
 * length-transformed context (linear), the first non-autoregressive
 * decoder alone (decoder0), dual decoders with tied weights (shared_d2),
 * or the full dual-decoder model (d2). A learned affine map transforms
 * the context's length dimension from the padded state length to the
 * fixed action length, which is what lets the non-autoregressive heads
 * emit all action slots in one pass per decoder.
 *
 * Training and scoring run on tensor ops end to end. Game-time inference
 * precomputes everything whose inputs are known up front in plain JS with
 * cached weights: the encoder and the non-autoregressive decoders finish
 * in fused passes without ever re-entering the tensor runtime, while the
 * autoregressive decoder must go back to it for every step, because each
 * step's argmax feeds the next step's input. That is the latency
 * asymmetry the dual-decoder design buys.
 */

import * as tf from "@tensorflow/tfjs";
import { Rng } from "./rng.js";
import { BOS, EOS, Manifest, PAD, Vocab, actionVocab, stateVocab } from "./vocab.js";

export type DecoderKind = "ar" | "linear" | "decoder0" | "shared_d2" | "d2";

export interface ModelConfig {
  decoder: DecoderKind;
  encoderLayers: number;
  width: number; // embedding and decoder width d; each encoder direction is d/2
  actionLength: number; // n
  stateLength: number; // states are padded/truncated to this many tokens
  dropout: number;
  lossWeights?: number[]; // per-slot loss weights, defaults to all ones
}

export function configFromManifest(
  manifest: Manifest,
  decoder: DecoderKind,
  overrides: Partial<ModelConfig> = {},
): ModelConfig {
  return {
    decoder,
    encoderLayers: decoder === "linear" ? 6 : 4,
    width: 512,
    actionLength: manifest.action_length,
    stateLength: manifest.pos_vocab_bound,
    dropout: 0.5,
    ...overrides,
  };
}

interface NamedVariable {
  name: string;
  variable: tf.Variable;
}

let modelUid = 0;

class Params {
  readonly all: NamedVariable[] = [];
  private readonly prefix = `m${modelUid++}`;

  constructor(private rng: Rng) {}

  // variables get a per-model prefix (the tfjs registry is global); the
  // logical name without it is what checkpoints are keyed by
  make(name: string, shape: number[], fanIn: number, fanOut: number): tf.Variable {
    const scale = Math.sqrt(6 / (fanIn + fanOut));
    const size = shape.reduce((a, b) => a * b, 1);
    const variable = tf.variable(
      tf.tensor(this.rng.uniformArray(size, scale), shape),
      true,
      `${this.prefix}/${name}`,
    );
    this.all.push({ name, variable });
    return variable;
  }

  zeros(name: string, shape: number[]): tf.Variable {
    const variable = tf.variable(tf.zeros(shape), true, `${this.prefix}/${name}`);
    this.all.push({ name, variable });
    return variable;
  }
}

class Dense {
  readonly w: tf.Variable;
  readonly b: tf.Variable;

  constructor(params: Params, name: string, input: number, output: number) {
    this.w = params.make(`${name}/w`, [input, output], input, output);
    this.b = params.zeros(`${name}/b`, [output]);
  }

  apply(x: tf.Tensor2D): tf.Tensor2D {
    return tf.add(tf.matMul(x, this.w as tf.Tensor2D), this.b) as tf.Tensor2D;
  }
}

class LstmCell {
  readonly kernel: tf.Variable; // (input + hidden) x 4*hidden, basicLSTMCell layout
  readonly bias: tf.Variable;
  private forgetBias = tf.scalar(1.0);

  constructor(params: Params, name: string, readonly input: number, readonly hidden: number) {
    this.kernel = params.make(`${name}/kernel`, [input + hidden, 4 * hidden], input + hidden, hidden);
    this.bias = params.zeros(`${name}/bias`, [4 * hidden]);
  }

  zeroState(batch: number): [tf.Tensor2D, tf.Tensor2D] {
    return [tf.zeros([batch, this.hidden]), tf.zeros([batch, this.hidden])];
  }

  step(x: tf.Tensor2D, c: tf.Tensor2D, h: tf.Tensor2D): [tf.Tensor2D, tf.Tensor2D] {
    return tf.basicLSTMCell(
      this.forgetBias,
      this.kernel as tf.Tensor2D,
      this.bias as tf.Tensor1D,
      x,
      c,
      h,
    );
  }
}

/** Dot-product attention over the encoded context with pad masking. */
function attend(query: tf.Tensor2D, context: tf.Tensor3D, mask: tf.Tensor2D): tf.Tensor2D {
  const scores = tf.squeeze<tf.Tensor2D>(
    tf.matMul(context, tf.expandDims(query, 2)),
    [2],
  ); // B x M
  const masked = tf.add(scores, tf.mul(tf.sub(mask, 1), 1e9)) as tf.Tensor2D;
  const alpha = tf.softmax(masked);
  return tf.squeeze<tf.Tensor2D>(tf.matMul(tf.expandDims(alpha, 1), context), [1]); // B x d
}

class RnnDecoder {
  readonly cell: LstmCell;
  readonly combine: Dense;
  readonly out: Dense;

  constructor(params: Params, name: string, width: number, vocabSize: number) {
    this.cell = new LstmCell(params, `${name}/cell`, width, width);
    this.combine = new Dense(params, `${name}/combine`, 2 * width, width);
    this.out = new Dense(params, `${name}/out`, width, vocabSize);
  }

  stepLogits(
    input: tf.Tensor2D,
    state: [tf.Tensor2D, tf.Tensor2D],
    context: tf.Tensor3D,
    mask: tf.Tensor2D,
  ): { logits: tf.Tensor2D; state: [tf.Tensor2D, tf.Tensor2D] } {
    const [c, h] = this.cell.step(input, state[0], state[1]);
    const ctx = attend(h, context, mask);
    const combined = tf.tanh(this.combine.apply(tf.concat([h, ctx], 1) as tf.Tensor2D));
    return { logits: this.out.apply(combined as tf.Tensor2D), state: [c, h] };
  }

  /** All positions of a known input sequence (B x n x d) in one sweep.
   *
   * Because the inputs need no feedback from earlier predictions, the
   * input-side gate matmuls, the attention, and the output projection are
   * each one batched op; only the thin hidden-to-hidden recurrence steps
   * sequentially. Same cell math and weights as the stepLogits loop.
   */
  runSequence(inputs: tf.Tensor3D, context: tf.Tensor3D, mask: tf.Tensor2D): tf.Tensor3D {
    const [batch, steps, d] = inputs.shape;
    const hiddenSize = this.cell.hidden;
    const kernel = this.cell.kernel as tf.Tensor2D;
    const inputRows = tf.slice(kernel, [0, 0], [d, -1]) as tf.Tensor2D;
    const hiddenRows = tf.slice(kernel, [d, 0], [-1, -1]) as tf.Tensor2D;
    const flatInputs = tf.reshape(inputs, [batch * steps, d]) as tf.Tensor2D;
    const inputGates = tf.add(tf.matMul(flatInputs, inputRows), this.cell.bias);
    const perStep = tf.unstack(
      tf.reshape(inputGates, [batch, steps, 4 * hiddenSize]),
      1,
    ) as tf.Tensor2D[];

    let c: tf.Tensor2D = tf.zeros([batch, hiddenSize]);
    let h: tf.Tensor2D = tf.zeros([batch, hiddenSize]);
    const states: tf.Tensor2D[] = [];
    for (let t = 0; t < steps; t++) {
      const gates = tf.add(perStep[t], tf.matMul(h, hiddenRows));
      const [i, j, f, o] = tf.split(gates, 4, 1);
      // same gate math as tf.basicLSTMCell with forget bias 1
      c = tf.add(
        tf.mul(c, tf.sigmoid(tf.add(f, 1))),
        tf.mul(tf.sigmoid(i), tf.tanh(j)),
      ) as tf.Tensor2D;
      h = tf.mul(tf.tanh(c), tf.sigmoid(o)) as tf.Tensor2D;
      states.push(h);
    }
    const queries = tf.stack(states, 1) as unknown as tf.Tensor3D; // B x n x d

    const scores = tf.matMul(queries, context, false, true); // B x n x M
    const masked = tf.add(scores, tf.mul(tf.sub(tf.expandDims(mask, 1), 1), 1e9));
    const alpha = tf.softmax(masked);
    const ctxs = tf.matMul(alpha as tf.Tensor3D, context); // B x n x d
    const combined = tf.tanh(
      this.combine.apply(
        tf.reshape(tf.concat([queries, ctxs], 2), [batch * steps, 2 * d]) as tf.Tensor2D,
      ),
    );
    const logits = this.out.apply(combined as tf.Tensor2D);
    return tf.reshape(logits, [batch, steps, -1]) as tf.Tensor3D;
  }
}

// --- plain-JS inference kernels ---------------------------------------------

/** The hidden-state sweep of one LSTM direction in plain JS. gatesData
 * holds the premultiplied input-side gates (steps x 4h, bias included);
 * gate math matches tf.basicLSTMCell with forget bias 1. */
function lstmSweepJs(
  gatesData: Float32Array,
  khData: Float32Array,
  steps: number,
  hidden: number,
  reverse: boolean,
): Float32Array {
  const cols = 4 * hidden;
  const out = new Float32Array(steps * hidden);
  const gates = new Float32Array(cols);
  const c = new Float32Array(hidden);
  const h = new Float32Array(hidden);
  for (let s = 0; s < steps; s++) {
    const t = reverse ? steps - 1 - s : s;
    gates.set(gatesData.subarray(t * cols, (t + 1) * cols));
    matmulJs(h, 1, hidden, khData, cols, gates);
    for (let u = 0; u < hidden; u++) {
      const i = 1 / (1 + Math.exp(-gates[u]));
      const j = Math.tanh(gates[hidden + u]);
      const f = 1 / (1 + Math.exp(-(gates[2 * hidden + u] + 1)));
      const o = 1 / (1 + Math.exp(-gates[3 * hidden + u]));
      c[u] = c[u] * f + i * j;
      h[u] = Math.tanh(c[u]) * o;
    }
    out.set(h, t * hidden);
  }
  return out;
}

/** out[r, :] += x[r, :] @ w for row-major w (inner x cols); saxpy form
 * with a 4-wide unroll, which V8 runs several times faster than the
 * straightforward loop. */
function matmulJs(
  x: Float32Array, rows: number, inner: number,
  w: Float32Array, cols: number, out: Float32Array,
): void {
  const tail = cols - (cols % 4);
  for (let r = 0; r < rows; r++) {
    const xBase = r * inner;
    const oBase = r * cols;
    for (let k = 0; k < inner; k++) {
      const xv = x[xBase + k];
      if (xv === 0) continue;
      const wBase = k * cols;
      let c = 0;
      for (; c < tail; c += 4) {
        out[oBase + c] += xv * w[wBase + c];
        out[oBase + c + 1] += xv * w[wBase + c + 1];
        out[oBase + c + 2] += xv * w[wBase + c + 2];
        out[oBase + c + 3] += xv * w[wBase + c + 3];
      }
      for (; c < cols; c++) out[oBase + c] += xv * w[wBase + c];
    }
  }
}

function tileBias(bias: Float32Array, rows: number): Float32Array {
  const out = new Float32Array(rows * bias.length);
  for (let r = 0; r < rows; r++) out.set(bias, r * bias.length);
  return out;
}

/** Weight bytes for the JS kernels, invalidated automatically when a
 * variable is assigned (its dataId changes). */
class WeightCache {
  private cache = new WeakMap<object, Float32Array>();

  get(v: tf.Variable): Float32Array {
    const key = v.dataId as object;
    let data = this.cache.get(key);
    if (!data) {
      data = v.dataSync() as Float32Array;
      this.cache.set(key, data);
    }
    return data;
  }
}

export interface ForwardOptions {
  training?: boolean;
  teacher?: tf.Tensor2D; // gold action ids, B x n (ar only)
  tfRate?: number;
  rng?: Rng;
}

export interface Heads {
  head0: tf.Tensor3D; // B x n x |Va| (ar: B x (n+1) x |Va| including the EOS slot)
  head1?: tf.Tensor3D; // second dual-decoder head
}

export class Model {
  readonly stateVocab: Vocab;
  readonly actionVocab: Vocab;
  readonly params: Params;
  private embedStates: tf.Variable;
  private embedActions: tf.Variable;
  private encoderCells: { fwd: LstmCell; bwd: LstmCell }[];
  private lengthW: tf.Variable;
  private lengthB: tf.Variable;
  private linearOut?: Dense;
  private decoder0?: RnnDecoder;
  private decoder1?: RnnDecoder;
  private arDecoder?: RnnDecoder;
  private weightCache = new WeightCache();

  constructor(
    readonly config: ModelConfig,
    readonly manifest: Manifest,
    seed = 0,
  ) {
    if (config.width % 2 !== 0) throw new Error("width must be even");
    this.stateVocab = stateVocab(manifest);
    this.actionVocab = actionVocab(manifest);
    const rng = new Rng(seed * 2654435761 + 12345);
    this.params = new Params(rng);
    const d = config.width;
    const m = this.encoderLength;

    this.embedStates = this.params.make("embed/states", [this.stateVocab.size, d], d, d);
    this.embedActions = this.params.make("embed/actions", [this.actionVocab.size, d], d, d);
    this.encoderCells = [];
    for (let layer = 0; layer < config.encoderLayers; layer++) {
      this.encoderCells.push({
        fwd: new LstmCell(this.params, `encoder/${layer}/fwd`, d, d / 2),
        bwd: new LstmCell(this.params, `encoder/${layer}/bwd`, d, d / 2),
      });
    }
    // affine length transform: (hE^T W + b)^T maps M x d context to n x d
    this.lengthW = this.params.make("length/w", [m, config.actionLength], m, config.actionLength);
    this.lengthB = this.params.zeros("length/b", [d, config.actionLength]);

    const kind = config.decoder;
    if (kind === "linear") {
      this.linearOut = new Dense(this.params, "linear/out", d, this.actionVocab.size);
    } else if (kind === "ar") {
      this.arDecoder = new RnnDecoder(this.params, "ar", d, this.actionVocab.size);
    } else {
      this.decoder0 = new RnnDecoder(this.params, "decoder0", d, this.actionVocab.size);
      if (kind === "d2") {
        this.decoder1 = new RnnDecoder(this.params, "decoder1", d, this.actionVocab.size);
      } else if (kind === "shared_d2") {
        this.decoder1 = this.decoder0; // tied weights
      }
    }
  }

  /** Encoder input length: the padded state plus one BOS sentinel column. */
  get encoderLength(): number {
    return this.config.stateLength + 1;
  }

  parameterCount(): number {
    return this.params.all.reduce((total, v) => total + v.variable.size, 0);
  }

  variables(): tf.Variable[] {
    return this.params.all.map((v) => v.variable);
  }

  private stateRow(tokens: string[]): number[] {
    const m = this.encoderLength;
    const row = new Array<number>(m).fill(this.stateVocab.id(PAD));
    row[0] = this.stateVocab.id(BOS);
    tokens.slice(0, this.config.stateLength).forEach((tok, i) => {
      row[i + 1] = this.stateVocab.id(tok);
    });
    return row;
  }

  stateIds(states: string[][]): tf.Tensor2D {
    const rows = states.map((tokens) => this.stateRow(tokens));
    return tf.tensor2d(rows, [states.length, this.encoderLength], "int32");
  }

  actionIds(actions: string[][]): tf.Tensor2D {
    const rows = actions.map((tokens) => tokens.map((tok) => this.actionVocab.id(tok)));
    return tf.tensor2d(rows, [actions.length, this.config.actionLength], "int32");
  }

  /** Embedding lookup as oneHot @ table: differentiates through plain
   * matmuls, which every backend supports (gather's gradient does not). */
  private embedLookup(table: tf.Variable, ids: tf.Tensor): tf.Tensor {
    const vocab = table.shape[0] as number;
    const width = table.shape[1] as number;
    const hot = tf.reshape(tf.oneHot(tf.cast(ids, "int32"), vocab), [-1, vocab]) as tf.Tensor2D;
    return tf.reshape(tf.matMul(hot, table as tf.Tensor2D), [...ids.shape, width]);
  }

  private maybeDropout(x: tf.Tensor3D, opts: ForwardOptions): tf.Tensor3D {
    const rate = this.config.dropout;
    if (!opts.training || rate <= 0 || !opts.rng) return x;
    const mask = new Float32Array(x.size);
    for (let i = 0; i < mask.length; i++) {
      mask[i] = opts.rng.next() >= rate ? 1 / (1 - rate) : 0;
    }
    return tf.mul(x, tf.tensor(mask, x.shape)) as tf.Tensor3D;
  }

  /** Bidirectional recurrent context for a batch of padded states. */
  encode(ids: tf.Tensor2D, opts: ForwardOptions = {}): { context: tf.Tensor3D; mask: tf.Tensor2D } {
    const batch = ids.shape[0];
    const m = this.encoderLength;
    const padId = this.stateVocab.id(PAD);
    const mask = tf.cast(tf.notEqual(ids, padId), "float32") as tf.Tensor2D;
    let x = this.embedLookup(this.embedStates, ids) as tf.Tensor3D;
    for (const { fwd, bwd } of this.encoderCells) {
      const columns: tf.Tensor2D[] = [];
      for (let t = 0; t < m; t++) {
        columns.push(tf.squeeze<tf.Tensor2D>(tf.slice(x, [0, t, 0], [batch, 1, -1]), [1]));
      }
      const fwdOut: tf.Tensor2D[] = new Array(m);
      let [c, h] = fwd.zeroState(batch);
      for (let t = 0; t < m; t++) {
        [c, h] = fwd.step(columns[t], c, h);
        fwdOut[t] = h;
      }
      const bwdOut: tf.Tensor2D[] = new Array(m);
      [c, h] = bwd.zeroState(batch);
      for (let t = m - 1; t >= 0; t--) {
        [c, h] = bwd.step(columns[t], c, h);
        bwdOut[t] = h;
      }
      const merged = tf.stack(
        fwdOut.map((f, t) => tf.concat([f, bwdOut[t]], 1)),
        1,
      ) as unknown as tf.Tensor3D;
      x = this.maybeDropout(merged, opts);
    }
    return { context: x, mask };
  }

  /** (hE^T W + b)^T: transform the length dimension from M to n. */
  lengthTransform(context: tf.Tensor3D): tf.Tensor3D {
    const [batch, m, d] = context.shape;
    const n = this.config.actionLength;
    const transposed = tf.transpose(context, [0, 2, 1]); // B x d x M
    const flat = tf.reshape(transposed, [batch * d, m]) as tf.Tensor2D;
    const mapped = tf.add(
      tf.reshape(tf.matMul(flat, this.lengthW as tf.Tensor2D), [batch, d, n]),
      this.lengthB,
    ); // B x d x n
    return tf.transpose(mapped, [0, 2, 1]) as tf.Tensor3D; // B x n x d
  }

  /** Shift predicted action ids one position right, BOS in front. */
  shiftRight(ids: tf.Tensor2D): tf.Tensor2D {
    const batch = ids.shape[0];
    const n = ids.shape[1];
    const bos = tf.fill([batch, 1], this.actionVocab.id(BOS), "int32");
    return tf.concat([bos, tf.slice(ids, [0, 0], [batch, n - 1])], 1) as tf.Tensor2D;
  }

  /** Head logits for a batch; see Heads for the per-decoder shapes. */
  forward(ids: tf.Tensor2D, opts: ForwardOptions = {}): Heads {
    const { context, mask } = this.encode(ids, opts);
    const kind = this.config.decoder;
    if (kind === "linear") {
      const hF = this.lengthTransform(context);
      const flat = tf.reshape(hF, [-1, this.config.width]) as tf.Tensor2D;
      const logits = tf.reshape(this.linearOut!.apply(flat), [
        ids.shape[0],
        this.config.actionLength,
        this.actionVocab.size,
      ]) as tf.Tensor3D;
      return { head0: logits };
    }
    if (kind === "ar") {
      return { head0: this.forwardAr(context, mask, opts) };
    }
    const hF = this.lengthTransform(context);
    const head0 = this.decoder0!.runSequence(hF, context, mask);
    if (kind === "decoder0") {
      return { head0 };
    }
    // decoder1 consumes the predicted tokens as data; detach them from the
    // tape (argmax indices carry no gradient, and gather cannot backprop
    // through int32 indices)
    const argmax = tf.argMax(head0, 2) as tf.Tensor2D;
    const predicted = tf.tensor2d(
      argmax.arraySync() as number[][],
      argmax.shape as [number, number],
      "int32",
    );
    const shifted = this.shiftRight(predicted);
    const inputs = this.embedLookup(this.embedActions, shifted) as tf.Tensor3D;
    const head1 = this.decoder1!.runSequence(inputs, context, mask);
    return { head0, head1 };
  }

  private forwardAr(context: tf.Tensor3D, mask: tf.Tensor2D, opts: ForwardOptions): tf.Tensor3D {
    const batch = context.shape[0];
    const n = this.config.actionLength;
    let input = this.embedLookup(
      this.embedActions, tf.fill([batch], this.actionVocab.id(BOS), "int32")) as tf.Tensor2D;
    let state = this.arDecoder!.cell.zeroState(batch);
    const logits: tf.Tensor2D[] = [];
    for (let i = 0; i <= n; i++) {
      const step = this.arDecoder!.stepLogits(input, state, context, mask);
      logits.push(step.logits);
      state = step.state;
      if (i === n) break;
      const useTeacher =
        opts.teacher !== undefined && (opts.rng ? opts.rng.next() < (opts.tfRate ?? 0.5) : true);
      const nextIds = useTeacher
        ? (tf.squeeze<tf.Tensor1D>(tf.slice(opts.teacher!, [0, i], [batch, 1]), [1]) as tf.Tensor1D)
        : (tf.argMax(step.logits, 1) as tf.Tensor1D);
      input = this.embedLookup(this.embedActions, nextIds) as tf.Tensor2D;
    }
    return tf.stack(logits, 1) as unknown as tf.Tensor3D; // B x (n+1) x |Va|
  }

  /** Per-head negative log-likelihood, summed over heads.
   *
   * Each head contributes the per-slot cross entropies, weighted by the
   * configured slot weights (ones by default), summed over slots and
   * averaged over the batch; uniform logits therefore cost n*log|Va| per
   * head. The ar head appends an EOS slot to the targets.
   */
  loss(heads: Heads, goldIds: tf.Tensor2D): tf.Scalar {
    const vocab = this.actionVocab.size;
    const batch = goldIds.shape[0];
    const n = this.config.actionLength;
    let targets = goldIds;
    let weights = this.config.lossWeights ?? new Array(n).fill(1);
    if (this.config.decoder === "ar") {
      const eos = tf.fill([batch, 1], this.actionVocab.id(EOS), "int32");
      targets = tf.concat([goldIds, eos], 1) as tf.Tensor2D;
      weights = [...weights, 1];
    }
    const oneHot = tf.oneHot(tf.cast(targets, "int32"), vocab);
    const weightRow = tf.tensor2d([weights], [1, weights.length]);

    const headLoss = (logits: tf.Tensor3D): tf.Scalar => {
      const logProbs = tf.logSoftmax(logits, 2);
      const ce = tf.neg(tf.sum(tf.mul(oneHot, logProbs), 2)); // B x slots
      return tf.mean(tf.sum(tf.mul(ce, weightRow), 1)) as tf.Scalar;
    };

    let total = headLoss(heads.head0);
    if (heads.head1) {
      total = tf.add(total, headLoss(heads.head1)) as tf.Scalar;
    }
    return total;
  }

  /** The n x |Va| action scores a game move is argmaxed from (tensor path). */
  actionScores(state: string[]): tf.Tensor2D {
    return tf.tidy(() => {
      const ids = this.stateIds([state]);
      const heads = this.forward(ids);
      const scores = heads.head1 ?? heads.head0;
      const n = this.config.actionLength;
      return tf.squeeze<tf.Tensor2D>(tf.slice(scores, [0, 0, 0], [1, n, -1]), [0]);
    });
  }

  /** Greedy action through the tensor runtime only; the reference the JS
   * inference path is tested against. */
  predictTensor(state: string[]): string[] {
    if (this.config.decoder !== "ar") {
      return tf.tidy(() => {
        const ids = tf.argMax(this.actionScores(state), 1).dataSync();
        return Array.from(ids, (id) => this.actionVocab.token(id as number));
      });
    }
    return tf.tidy(() => {
      const { context, mask } = this.encode(this.stateIds([state]));
      return this.arGreedyLoop(context, mask);
    });
  }

  /** Greedy action for one state, as served in games.
   *
   * The encoder always runs as fused JS (its inputs are the state, fully
   * known). Non-autoregressive heads finish in JS as well: one fused pass
   * per decoder. The ar head re-enters the tensor runtime for its n+1
   * dependent steps and stops early at EOS, padding the remainder.
   */
  predict(state: string[]): string[] {
    const enc = this.encodeJs(state);
    if (this.config.decoder === "ar") {
      return tf.tidy(() => {
        const context = tf.tensor3d(enc.context, [1, this.encoderLength, this.config.width]);
        const mask = tf.tensor2d(enc.mask, [1, this.encoderLength]);
        return this.arGreedyLoop(context, mask);
      });
    }
    return this.predictJs(enc);
  }

  private arGreedyLoop(context: tf.Tensor3D, mask: tf.Tensor2D): string[] {
    const n = this.config.actionLength;
    let input = this.embedLookup(
      this.embedActions, tf.tensor1d([this.actionVocab.id(BOS)], "int32")) as tf.Tensor2D;
    let state = this.arDecoder!.cell.zeroState(1);
    const eosId = this.actionVocab.id(EOS);
    const tokens: string[] = [];
    for (let i = 0; i <= n; i++) {
      const step = this.arDecoder!.stepLogits(input, state, context, mask);
      const id = (tf.argMax(step.logits, 1).dataSync() as Int32Array)[0];
      if (id === eosId || tokens.length === n) break;
      tokens.push(this.actionVocab.token(id));
      state = step.state;
      input = this.embedLookup(this.embedActions, tf.tensor1d([id], "int32")) as tf.Tensor2D;
    }
    while (tokens.length < n) tokens.push(PAD);
    return tokens;
  }

  // --- JS inference ----------------------------------------------------------

  private encodeJs(state: string[]): { context: Float32Array; mask: Float32Array } {
    const w = this.weightCache;
    const m = this.encoderLength;
    const d = this.config.width;
    const row = this.stateRow(state);
    const padId = this.stateVocab.id(PAD);
    const mask = new Float32Array(m);
    for (let t = 0; t < m; t++) mask[t] = row[t] === padId ? 0 : 1;

    const embed = w.get(this.embedStates);
    let x = new Float32Array(m * d);
    for (let t = 0; t < m; t++) {
      x.set(embed.subarray(row[t] * d, (row[t] + 1) * d), t * d);
    }
    for (const { fwd, bwd } of this.encoderCells) {
      const hidden = fwd.hidden;
      const sweep = (cell: LstmCell, reverse: boolean): Float32Array => {
        const kernel = w.get(cell.kernel);
        const gates = tileBias(w.get(cell.bias), m);
        matmulJs(x, m, d, kernel.subarray(0, d * 4 * hidden), 4 * hidden, gates);
        return lstmSweepJs(gates, kernel.subarray(d * 4 * hidden), m, hidden, reverse);
      };
      const fwdStates = sweep(fwd, false);
      const bwdStates = sweep(bwd, true);
      const merged = new Float32Array(m * d);
      for (let t = 0; t < m; t++) {
        merged.set(fwdStates.subarray(t * hidden, (t + 1) * hidden), t * d);
        merged.set(bwdStates.subarray(t * hidden, (t + 1) * hidden), t * d + hidden);
      }
      x = merged;
    }
    return { context: x, mask };
  }

  /** One fused pass of a non-autoregressive decoder, entirely in JS. */
  private decoderPassJs(
    dec: RnnDecoder,
    inputs: Float32Array, // n x d
    context: Float32Array, // M x d
    mask: Float32Array,
  ): Float32Array {
    const w = this.weightCache;
    const n = this.config.actionLength;
    const d = this.config.width;
    const m = this.encoderLength;
    const va = this.actionVocab.size;
    const kernel = w.get(dec.cell.kernel);
    const gates = tileBias(w.get(dec.cell.bias), n);
    matmulJs(inputs, n, d, kernel.subarray(0, d * 4 * d), 4 * d, gates);
    const hs = lstmSweepJs(gates, kernel.subarray(d * 4 * d), n, d, false); // n x d

    const combineW = w.get(dec.combine.w);
    const combineB = w.get(dec.combine.b);
    const outW = w.get(dec.out.w);
    const outB = w.get(dec.out.b);
    const logits = new Float32Array(n * va);
    const concat = new Float32Array(2 * d);
    const scores = new Float32Array(m);
    for (let t = 0; t < n; t++) {
      const h = hs.subarray(t * d, (t + 1) * d);
      // masked dot-product attention over the context
      let best = -Infinity;
      for (let p = 0; p < m; p++) {
        if (!mask[p]) {
          scores[p] = -Infinity;
          continue;
        }
        let s = 0;
        const cBase = p * d;
        for (let k = 0; k < d; k++) s += h[k] * context[cBase + k];
        scores[p] = s;
        if (s > best) best = s;
      }
      let z = 0;
      for (let p = 0; p < m; p++) {
        scores[p] = mask[p] ? Math.exp(scores[p] - best) : 0;
        z += scores[p];
      }
      concat.fill(0);
      concat.set(h);
      for (let p = 0; p < m; p++) {
        const alpha = scores[p] / z;
        if (alpha === 0) continue;
        const cBase = p * d;
        for (let k = 0; k < d; k++) concat[d + k] += alpha * context[cBase + k];
      }
      const combined = new Float32Array(combineB);
      matmulJs(concat, 1, 2 * d, combineW, d, combined);
      for (let k = 0; k < d; k++) combined[k] = Math.tanh(combined[k]);
      const slot = logits.subarray(t * va, (t + 1) * va);
      slot.set(outB);
      matmulJs(combined, 1, d, outW, va, slot);
    }
    return logits;
  }

  private predictJs(enc: { context: Float32Array; mask: Float32Array }): string[] {
    const w = this.weightCache;
    const n = this.config.actionLength;
    const d = this.config.width;
    const m = this.encoderLength;
    const va = this.actionVocab.size;

    // length transform: hF[i, k] = sum_m hE[m, k] W[m, i] + B[k, i]
    const lw = w.get(this.lengthW);
    const lb = w.get(this.lengthB);
    const hF = new Float32Array(n * d);
    for (let i = 0; i < n; i++) {
      const base = i * d;
      for (let k = 0; k < d; k++) hF[base + k] = lb[k * n + i];
    }
    for (let p = 0; p < m; p++) {
      const cBase = p * d;
      for (let i = 0; i < n; i++) {
        const wv = lw[p * n + i];
        if (wv === 0) continue;
        const base = i * d;
        for (let k = 0; k < d; k++) hF[base + k] += wv * enc.context[cBase + k];
      }
    }

    const argmaxRows = (logits: Float32Array): number[] => {
      const ids: number[] = [];
      for (let t = 0; t < n; t++) {
        let bestId = 0;
        let best = -Infinity;
        for (let v = 0; v < va; v++) {
          const s = logits[t * va + v];
          if (s > best) {
            best = s;
            bestId = v;
          }
        }
        ids.push(bestId);
      }
      return ids;
    };

    let logits: Float32Array;
    if (this.config.decoder === "linear") {
      const outW = w.get(this.linearOut!.w);
      logits = tileBias(w.get(this.linearOut!.b), n);
      matmulJs(hF, n, d, outW, va, logits);
    } else {
      logits = this.decoderPassJs(this.decoder0!, hF, enc.context, enc.mask);
      if (this.config.decoder !== "decoder0") {
        const ids0 = argmaxRows(logits);
        const shifted = [this.actionVocab.id(BOS), ...ids0.slice(0, n - 1)];
        const embed = w.get(this.embedActions);
        const inputs = new Float32Array(n * d);
        shifted.forEach((id, t) => inputs.set(embed.subarray(id * d, (id + 1) * d), t * d));
        logits = this.decoderPassJs(this.decoder1!, inputs, enc.context, enc.mask);
      }
    }
    return argmaxRows(logits).map((id) => this.actionVocab.token(id));
  }

  saveWeights(): Record<string, { shape: number[]; b64: string }> {
    const out: Record<string, { shape: number[]; b64: string }> = {};
    for (const { name, variable } of this.params.all) {
      const data = variable.dataSync() as Float32Array;
      out[name] = {
        shape: variable.shape.slice(),
        b64: Buffer.from(data.buffer, data.byteOffset, data.byteLength).toString("base64"),
      };
    }
    return out;
  }

  loadWeights(weights: Record<string, { shape: number[]; b64: string }>): void {
    for (const { name, variable } of this.params.all) {
      const entry = weights[name];
      if (!entry) throw new Error(`checkpoint is missing weight ${name}`);
      const buf = Buffer.from(entry.b64, "base64");
      const data = new Float32Array(buf.buffer, buf.byteOffset, buf.byteLength / 4);
      variable.assign(tf.tensor(Array.from(data), entry.shape));
    }
  }
}

export interface Checkpoint {
  config: ModelConfig;
  manifest: Manifest;
  weights: Record<string, { shape: number[]; b64: string }>;
}

export function saveCheckpoint(model: Model): Checkpoint {
  return { config: model.config, manifest: model.manifest, weights: model.saveWeights() };
}

export function loadCheckpoint(checkpoint: Checkpoint): Model {
  const model = new Model(checkpoint.config, checkpoint.manifest);
  model.loadWeights(checkpoint.weights);
  return model;
}
