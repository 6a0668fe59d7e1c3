/**
 * DDPG: deterministic actor + critic with target networks and replay.
 * The actor emits a continuous vector (per-subchannel user logits plus
 * one TTI knob in [0, 1]); execution projects it onto the legal discrete
 * set (argmax per subchannel, nearest TTI level). The critic learns over
 * the continuous action and drives the actor through its input gradient.
 *
 * Two guards keep the relaxation workable on a discrete problem: with
 * probability epsilon the agent explores a uniformly random discrete
 * action (stored at its prototype encoding, so the critic sees every
 * projection region), and the actor's pre-activations are lightly
 * regularized so tanh saturation cannot lock the policy.
 */

import type { SpecMessage } from "../bridge-client.js";
import {
  assignmentSpaceSize,
  decodeAssignment,
  nearestLevelIndex,
  projectAssignmentLogits,
} from "../actions.js";
import { Mlp } from "../mlp.js";
import { ReplayBuffer, type Transition } from "../replay.js";
import { Rng } from "../rng.js";
import { epsilonAt, lrScaleAt, nStepTransitions } from "./dqn-core.js";
import type { ActResult, Agent, AgentConfig, AgentTransition } from "./types.js";
import { makeNormalizer } from "./types.js";

const PREACT_REG = 1e-3;

export class DdpgAgent implements Agent {
  readonly kind = "ddpg" as const;
  private readonly actor: Mlp;
  private readonly actorTarget: Mlp;
  private readonly critic: Mlp;
  private readonly criticTarget: Mlp;
  private readonly replay: ReplayBuffer;
  private readonly rng: Rng;
  private readonly normalize: (obs: number[]) => number[];
  private readonly actionSize: number;
  private readonly assignSize: number;
  private sigma: number;
  private kick: number;
  private lrScale = 1.0;

  constructor(private readonly spec: SpecMessage, private readonly cfg: AgentConfig) {
    this.rng = new Rng(cfg.seed);
    this.normalize = makeNormalizer(spec);
    const obsSize = spec.observation_layout.length;
    this.actionSize = spec.users * spec.subchannels + 1;
    this.assignSize = assignmentSpaceSize(spec.users, spec.subchannels);
    this.actor = new Mlp([obsSize, ...cfg.hidden, this.actionSize], this.rng);
    this.actorTarget = this.actor.clone();
    this.critic = new Mlp([obsSize + this.actionSize, ...cfg.hidden, 1], this.rng);
    this.criticTarget = this.critic.clone();
    this.replay = new ReplayBuffer(cfg.replayCapacity);
    this.sigma = cfg.exploreStart;
    this.kick = cfg.ddpgKickProb;
  }

  /** Squash the linear actor head: tanh logits, sigmoid TTI knob. */
  private squash(z: Float64Array): Float64Array {
    const a = new Float64Array(z.length);
    for (let i = 0; i < z.length - 1; i++) a[i] = Math.tanh(z[i]);
    a[z.length - 1] = 1.0 / (1.0 + Math.exp(-z[z.length - 1]));
    return a;
  }

  private squashGrad(z: Float64Array, gradA: Float64Array): Float64Array {
    const g = new Float64Array(z.length);
    for (let i = 0; i < z.length - 1; i++) {
      const t = Math.tanh(z[i]);
      g[i] = gradA[i] * (1.0 - t * t);
    }
    const last = z.length - 1;
    const s = 1.0 / (1.0 + Math.exp(-z[last]));
    g[last] = gradA[last] * s * (1.0 - s);
    return g;
  }

  private policy(net: Mlp, x: number[]): Float64Array {
    return this.squash(net.forward(x));
  }

  private project(action: Float64Array): { assignment: number[]; ttiIndex: number } {
    const logits = action.subarray(0, this.actionSize - 1);
    return {
      assignment: projectAssignmentLogits(logits, this.spec.users, this.spec.subchannels),
      ttiIndex: nearestLevelIndex(action[this.actionSize - 1], this.spec.tti_levels_s.length),
    };
  }

  /** Prototype continuous encoding of a discrete action. */
  private prototype(assignment: number[], ttiIndex: number): Float64Array {
    const a = new Float64Array(this.actionSize);
    for (let s = 0; s < this.spec.subchannels; s++) {
      for (let u = 0; u < this.spec.users; u++) {
        a[s * this.spec.users + u] = assignment[s] === u ? 0.9 : -0.9;
      }
    }
    const levels = this.spec.tti_levels_s.length;
    a[this.actionSize - 1] = levels > 1 ? ttiIndex / (levels - 1) : 0.5;
    return a;
  }

  act(obs: number[], explore: boolean): ActResult {
    const x = this.normalize(obs);
    if (explore && this.kick > 0 && this.rng.next() < this.kick) {
      const assignmentIndex = this.rng.int(this.assignSize);
      const assignment = decodeAssignment(
        assignmentIndex, this.spec.users, this.spec.subchannels,
      );
      const ttiIndex = this.rng.int(this.spec.tti_levels_s.length);
      return {
        assignment,
        ttiIndex,
        encoded: Array.from(this.prototype(assignment, ttiIndex)),
      };
    }
    const a = this.policy(this.actor, x);
    if (explore) {
      for (let i = 0; i < a.length - 1; i++) {
        a[i] = Math.min(1, Math.max(-1, a[i] + this.sigma * this.rng.gauss()));
      }
      const last = a.length - 1;
      a[last] = Math.min(1, Math.max(0, a[last] + this.sigma * this.rng.gauss()));
    }
    const { assignment, ttiIndex } = this.project(a);
    return { assignment, ttiIndex, encoded: Array.from(a) };
  }

  private episode: AgentTransition[] = [];

  observe(t: AgentTransition): void {
    this.episode.push({
      ...t,
      obs: this.normalize(t.obs),
      nextObs: this.normalize(t.nextObs),
    });
    if (t.done) this.flushEpisode();
  }

  /** n-step returns enter replay at episode end; one update pair per step. */
  private flushEpisode(): void {
    const steps = this.episode.map((t) => ({
      obs: t.obs,
      encoded: t.encoded,
      reward: t.reward,
      nextObs: t.nextObs,
      done: t.done,
    }));
    for (const tr of nStepTransitions(steps, this.cfg.nStep, this.cfg.discount)) {
      this.replay.push(tr);
    }
    const updates = this.episode.length * this.cfg.updatesPerStep;
    this.episode = [];
    if (this.replay.size < Math.max(this.cfg.warmup, this.cfg.batchSize)) return;
    for (let i = 0; i < updates; i++) this.updateOnce();
  }

  private updateOnce(): void {
    const batch = this.replay.sample(this.cfg.batchSize, this.rng);

    // critic: TD toward the n-step return plus gamma^n Q'(s_n, mu'(s_n))
    this.critic.clearGrads();
    for (const tr of batch) {
      let target = tr.reward;
      if (!tr.done) {
        const g = (tr as Transition).bootstrapGamma ?? this.cfg.discount;
        const aNext = this.policy(this.actorTarget, tr.nextObs);
        target += g * this.criticTarget.forward([...tr.nextObs, ...aNext])[0];
      }
      const q = this.critic.forward([...tr.obs, ...tr.action])[0];
      let td = q - target;
      if (td > this.cfg.tdClamp) td = this.cfg.tdClamp;
      if (td < -this.cfg.tdClamp) td = -this.cfg.tdClamp;
      this.critic.backward([td]);
    }
    this.critic.adamStep(this.cfg.learningRate * this.lrScale);

    // actor: ascend Q(s, mu(s)) through the critic's action gradient,
    // with a light pull on the pre-activations against saturation
    this.actor.clearGrads();
    for (const tr of batch) {
      const z = this.actor.forward(tr.obs);
      const a = this.squash(z);
      this.critic.forward([...tr.obs, ...a]);
      const gradIn = this.critic.backward([1.0]);
      this.critic.clearGrads(); // gradient probe only; no critic update here
      const gradA = new Float64Array(this.actionSize);
      for (let i = 0; i < this.actionSize; i++) {
        gradA[i] = -gradIn[tr.obs.length + i]; // minimize -Q
      }
      const gradZ = this.squashGrad(z, gradA);
      for (let i = 0; i < gradZ.length; i++) gradZ[i] += PREACT_REG * z[i];
      this.actor.backward(gradZ);
    }
    this.actor.adamStep(this.cfg.actorLearningRate * this.lrScale);

    this.actorTarget.softUpdateFrom(this.actor, this.cfg.tau);
    this.criticTarget.softUpdateFrom(this.critic, this.cfg.tau);
  }

  onEpisodeEnd(episode: number): void {
    this.sigma = epsilonAt(this.cfg, episode);
    this.lrScale = lrScaleAt(this.cfg, episode);
  }

  checkpoint(): unknown {
    return {
      kind: this.kind,
      actor: this.actor.toJSON(),
      critic: this.critic.toJSON(),
    };
  }
}
