/** Token tables derived from a dataset manifest.
 *
 * State vocabulary: PAD and UNK ahead of the manifest's state tokens; the
 * encoder also prepends a BOS sentinel column so even an empty state has
 * one attendable position. Action vocabulary: PAD (emitted for missing
 * autoregressive slots), BOS and EOS (autoregression control) ahead of
 * the manifest's action tokens.
 */

export const PAD = "<pad>";
export const UNK = "<unk>";
export const BOS = "<bos>";
export const EOS = "<eos>";

export class Vocab {
  readonly tokens: string[];
  private readonly index = new Map<string, number>();
  private warned = new Set<string>();

  constructor(tokens: string[]) {
    this.tokens = tokens;
    tokens.forEach((tok, i) => this.index.set(tok, i));
  }

  get size(): number {
    return this.tokens.length;
  }

  has(token: string): boolean {
    return this.index.has(token);
  }

  /** Index of a token; unknown tokens map to UNK (logged once each). */
  id(token: string): number {
    const found = this.index.get(token);
    if (found !== undefined) return found;
    if (!this.warned.has(token)) {
      this.warned.add(token);
      console.error(`vocab: unknown token ${JSON.stringify(token)} -> ${UNK}`);
    }
    return this.index.get(UNK) ?? 0;
  }

  token(id: number): string {
    return this.tokens[id] ?? UNK;
  }
}

export interface Manifest {
  task: string;
  action_length: number;
  pos_vocab_bound: number;
  max_steps: number;
  state_vocab: string[];
  action_vocab: string[];
  [key: string]: unknown;
}

export function stateVocab(manifest: Manifest): Vocab {
  return new Vocab([PAD, UNK, BOS, ...manifest.state_vocab]);
}

export function actionVocab(manifest: Manifest): Vocab {
  return new Vocab([PAD, BOS, EOS, ...manifest.action_vocab]);
}
