/** Fixed-capacity ring buffer with seeded uniform sampling. */

import { Rng } from "./rng.js";

export interface Transition {
  obs: number[];
  action: number[]; // agent-specific encoding
  reward: number;
  nextObs: number[];
  done: boolean;
  /** discount on the bootstrap term; set by n-step accumulation */
  bootstrapGamma?: number;
}

export class ReplayBuffer {
  private items: Transition[] = [];
  private cursor = 0;

  constructor(readonly capacity: number) {
    if (capacity < 1) throw new Error("capacity must be >= 1");
  }

  get size(): number {
    return this.items.length;
  }

  push(t: Transition): void {
    if (this.items.length < this.capacity) {
      this.items.push(t);
    } else {
      this.items[this.cursor] = t;
      this.cursor = (this.cursor + 1) % this.capacity;
    }
  }

  sample(batchSize: number, rng: Rng): Transition[] {
    const out: Transition[] = [];
    for (let i = 0; i < batchSize; i++) {
      out.push(this.items[rng.int(this.items.length)]);
    }
    return out;
  }
}
