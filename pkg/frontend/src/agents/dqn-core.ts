/** Shared value-learning machinery for the DQN variants.
 *
 * Transitions buffer per episode and enter replay as n-step targets
 * (drop penalties land at the period end, and multi-step backups carry
 * them back through the episode far faster than 1-step TD).
 */

import { Mlp } from "../mlp.js";
import { ReplayBuffer, type Transition } from "../replay.js";
import { Rng } from "../rng.js";
import type { AgentConfig } from "./types.js";

export interface QHead {
  online: Mlp;
  target: Mlp;
  /** extracts this head's action index from the stored encoding */
  actionOf: (encoded: number[]) => number;
}

export function makeHead(
  inputSize: number,
  actions: number,
  cfg: AgentConfig,
  rng: Rng,
  actionOf: (encoded: number[]) => number,
): QHead {
  const online = new Mlp([inputSize, ...cfg.hidden, actions], rng);
  const target = online.clone();
  return { online, target, actionOf };
}

export function greedyAction(head: QHead, obs: number[]): number {
  const q = head.online.forward(obs);
  let best = 0;
  for (let a = 1; a < q.length; a++) if (q[a] > q[best]) best = a;
  return best;
}

function doubleQ(head: QHead, obs: number[]): number {
  // double-DQN target: the online net picks the action, the target net
  // prices it, cutting the max-operator's overestimation bias
  const onlineQ = head.online.forward(obs);
  let best = 0;
  for (let a = 1; a < onlineQ.length; a++) if (onlineQ[a] > onlineQ[best]) best = a;
  return head.target.forward(obs)[best];
}

export function epsilonAt(cfg: AgentConfig, episode: number): number {
  const frac = Math.min(1.0, episode / Math.max(1, cfg.exploreDecayEpisodes));
  return cfg.exploreStart + frac * (cfg.exploreEnd - cfg.exploreStart);
}

export function lrScaleAt(cfg: AgentConfig, episode: number): number {
  if (cfg.lrHalfLifeEpisodes <= 0) return 1.0;
  return Math.pow(0.5, episode / cfg.lrHalfLifeEpisodes);
}

interface RawStep {
  obs: number[];
  encoded: number[];
  reward: number;
  nextObs: number[];
  done: boolean;
}

/** Collapse an episode into n-step transitions (discount already applied). */
export function nStepTransitions(
  episode: RawStep[], n: number, gamma: number,
): Transition[] {
  const out: Transition[] = [];
  for (let t = 0; t < episode.length; t++) {
    const span = Math.min(n, episode.length - t);
    let reward = 0;
    for (let k = 0; k < span; k++) reward += Math.pow(gamma, k) * episode[t + k].reward;
    const last = episode[t + span - 1];
    out.push({
      obs: episode[t].obs,
      action: episode[t].encoded,
      reward,
      nextObs: last.nextObs,
      done: last.done,
      // discount to apply to the bootstrap term
      bootstrapGamma: Math.pow(gamma, span),
    } as Transition & { bootstrapGamma: number });
  }
  return out;
}

export class DqnMachinery {
  private readonly replay: ReplayBuffer;
  private episode: RawStep[] = [];
  private steps = 0;
  lrScale = 1.0;

  constructor(
    private readonly heads: QHead[],
    private readonly cfg: AgentConfig,
    private readonly rng: Rng,
    private readonly nStep: number,
  ) {
    this.replay = new ReplayBuffer(cfg.replayCapacity);
  }

  observe(step: RawStep): void {
    this.episode.push(step);
    this.steps += 1;
    if (this.steps % this.cfg.targetSyncSteps === 0) {
      for (const head of this.heads) head.target.copyFrom(head.online);
    }
    if (step.done) this.flushEpisode();
  }

  private flushEpisode(): void {
    const transitions = nStepTransitions(this.episode, this.nStep, this.cfg.discount);
    for (const t of transitions) this.replay.push(t);
    const updates = this.episode.length * this.cfg.updatesPerStep;
    for (let i = 0; i < updates; i++) {
      for (const head of this.heads) this.updateHead(head);
    }
    this.episode = [];
  }

  private updateHead(head: QHead): void {
    if (this.replay.size < Math.max(this.cfg.warmup, this.cfg.batchSize)) return;
    const batch = this.replay.sample(this.cfg.batchSize, this.rng);
    head.online.clearGrads();
    for (const t of batch) {
      const g = (t as Transition & { bootstrapGamma?: number }).bootstrapGamma
        ?? this.cfg.discount;
      const target = t.done ? t.reward : t.reward + g * doubleQ(head, t.nextObs);
      const q = head.online.forward(t.obs);
      const a = head.actionOf(t.action);
      let td = q[a] - target;
      if (td > this.cfg.tdClamp) td = this.cfg.tdClamp;
      if (td < -this.cfg.tdClamp) td = -this.cfg.tdClamp;
      const grad = new Float64Array(q.length);
      grad[a] = td;
      head.online.backward(grad);
    }
    head.online.adamStep(this.cfg.learningRate * this.lrScale);
  }
}
