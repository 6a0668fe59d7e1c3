/**
 * Small dense network with ReLU hidden layers and a linear head,
 * trained by Adam. Gradients accumulate over a minibatch and apply in
 * one step; backward() also returns the input gradient so a critic can
 * drive an actor (DDPG).
 */

import { Rng } from "./rng.js";

interface Layer {
  w: Float64Array; // out x in, row-major
  b: Float64Array;
  gw: Float64Array;
  gb: Float64Array;
  mw: Float64Array;
  vw: Float64Array;
  mb: Float64Array;
  vb: Float64Array;
  in: number;
  out: number;
}

export interface MlpJson {
  sizes: number[];
  weights: number[][];
  biases: number[][];
}

export class Mlp {
  readonly sizes: number[];
  private layers: Layer[] = [];
  private acts: Float64Array[] = []; // activations per layer incl. input
  private preacts: Float64Array[] = [];
  private adamT = 0;
  private accumulated = 0;

  constructor(sizes: number[], rng?: Rng) {
    if (sizes.length < 2) throw new Error("need at least input and output sizes");
    this.sizes = [...sizes];
    const r = rng ?? new Rng(1);
    for (let l = 0; l < sizes.length - 1; l++) {
      const nIn = sizes[l];
      const nOut = sizes[l + 1];
      const w = new Float64Array(nIn * nOut);
      const scale = Math.sqrt(2.0 / nIn); // He init for the ReLU stack
      for (let i = 0; i < w.length; i++) w[i] = r.gauss() * scale;
      this.layers.push({
        w,
        b: new Float64Array(nOut),
        gw: new Float64Array(nIn * nOut),
        gb: new Float64Array(nOut),
        mw: new Float64Array(nIn * nOut),
        vw: new Float64Array(nIn * nOut),
        mb: new Float64Array(nOut),
        vb: new Float64Array(nOut),
        in: nIn,
        out: nOut,
      });
    }
  }

  get inputSize(): number {
    return this.sizes[0];
  }

  get outputSize(): number {
    return this.sizes[this.sizes.length - 1];
  }

  /** Forward pass; caches activations for a following backward(). */
  forward(input: ArrayLike<number>): Float64Array {
    if (input.length !== this.inputSize) {
      throw new Error(`input size ${input.length}, expected ${this.inputSize}`);
    }
    this.acts = [Float64Array.from(input)];
    this.preacts = [];
    let x = this.acts[0];
    for (let l = 0; l < this.layers.length; l++) {
      const { w, b, in: nIn, out: nOut } = this.layers[l];
      const z = new Float64Array(nOut);
      for (let o = 0; o < nOut; o++) {
        let s = b[o];
        const row = o * nIn;
        for (let i = 0; i < nIn; i++) s += w[row + i] * x[i];
        z[o] = s;
      }
      this.preacts.push(z);
      const last = l === this.layers.length - 1;
      const a = last ? z : z.map((v) => (v > 0 ? v : 0));
      this.acts.push(a);
      x = a;
    }
    return x;
  }

  /**
   * Accumulate gradients from the loss gradient at the output of the
   * most recent forward(); returns the gradient at the input.
   */
  backward(gradOut: ArrayLike<number>): Float64Array {
    let grad = Float64Array.from(gradOut);
    for (let l = this.layers.length - 1; l >= 0; l--) {
      const layer = this.layers[l];
      const aPrev = this.acts[l];
      if (l < this.layers.length - 1) {
        const z = this.preacts[l];
        grad = grad.map((g, o) => (z[o] > 0 ? g : 0));
      }
      for (let o = 0; o < layer.out; o++) {
        const row = o * layer.in;
        const g = grad[o];
        layer.gb[o] += g;
        for (let i = 0; i < layer.in; i++) layer.gw[row + i] += g * aPrev[i];
      }
      const gradIn = new Float64Array(layer.in);
      for (let i = 0; i < layer.in; i++) {
        let s = 0;
        for (let o = 0; o < layer.out; o++) s += layer.w[o * layer.in + i] * grad[o];
        gradIn[i] = s;
      }
      grad = gradIn;
    }
    this.accumulated += 1;
    return grad;
  }

  /** Apply one Adam step over the accumulated gradients, then clear. */
  adamStep(lr: number, beta1 = 0.9, beta2 = 0.999, eps = 1e-8): void {
    if (this.accumulated === 0) return;
    const scale = 1.0 / this.accumulated;
    this.adamT += 1;
    const bc1 = 1 - Math.pow(beta1, this.adamT);
    const bc2 = 1 - Math.pow(beta2, this.adamT);
    for (const layer of this.layers) {
      for (let i = 0; i < layer.w.length; i++) {
        const g = layer.gw[i] * scale;
        layer.mw[i] = beta1 * layer.mw[i] + (1 - beta1) * g;
        layer.vw[i] = beta2 * layer.vw[i] + (1 - beta2) * g * g;
        layer.w[i] -= (lr * (layer.mw[i] / bc1)) / (Math.sqrt(layer.vw[i] / bc2) + eps);
        layer.gw[i] = 0;
      }
      for (let i = 0; i < layer.b.length; i++) {
        const g = layer.gb[i] * scale;
        layer.mb[i] = beta1 * layer.mb[i] + (1 - beta1) * g;
        layer.vb[i] = beta2 * layer.vb[i] + (1 - beta2) * g * g;
        layer.b[i] -= (lr * (layer.mb[i] / bc1)) / (Math.sqrt(layer.vb[i] / bc2) + eps);
        layer.gb[i] = 0;
      }
    }
    this.accumulated = 0;
  }

  clearGrads(): void {
    for (const layer of this.layers) {
      layer.gw.fill(0);
      layer.gb.fill(0);
    }
    this.accumulated = 0;
  }

  /** Hard copy of another net's parameters (target network sync). */
  copyFrom(other: Mlp): void {
    for (let l = 0; l < this.layers.length; l++) {
      this.layers[l].w.set(other.layers[l].w);
      this.layers[l].b.set(other.layers[l].b);
    }
  }

  /** Polyak soft update toward another net: p <- (1-tau) p + tau p_other. */
  softUpdateFrom(other: Mlp, tau: number): void {
    for (let l = 0; l < this.layers.length; l++) {
      const mine = this.layers[l];
      const theirs = other.layers[l];
      for (let i = 0; i < mine.w.length; i++) {
        mine.w[i] += tau * (theirs.w[i] - mine.w[i]);
      }
      for (let i = 0; i < mine.b.length; i++) {
        mine.b[i] += tau * (theirs.b[i] - mine.b[i]);
      }
    }
  }

  clone(): Mlp {
    const copy = new Mlp(this.sizes);
    copy.copyFrom(this);
    return copy;
  }

  toJSON(): MlpJson {
    return {
      sizes: [...this.sizes],
      weights: this.layers.map((l) => Array.from(l.w)),
      biases: this.layers.map((l) => Array.from(l.b)),
    };
  }

  static fromJSON(json: MlpJson): Mlp {
    const net = new Mlp(json.sizes);
    for (let l = 0; l < net.layers.length; l++) {
      net.layers[l].w.set(json.weights[l]);
      net.layers[l].b.set(json.biases[l]);
    }
    return net;
  }
}
