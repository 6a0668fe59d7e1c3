/**
 * Multi-DQN: the joint action space factors into two coordinated value
 * networks, one choosing the subchannel assignment and one choosing the
 * TTI level. Each head treats the other's choice as part of the
 * environment, shrinking users^subchannels * levels down to
 * users^subchannels + levels learnable outputs.
 */

import type { SpecMessage } from "../bridge-client.js";
import { assignmentSpaceSize, decodeAssignment } from "../actions.js";
import { Rng } from "../rng.js";
import {
  DqnMachinery,
  epsilonAt,
  greedyAction,
  lrScaleAt,
  makeHead,
  type QHead,
} from "./dqn-core.js";
import type { ActResult, Agent, AgentConfig, AgentTransition } from "./types.js";
import { makeNormalizer } from "./types.js";

export class MultiDqnAgent implements Agent {
  readonly kind = "multi_dqn" as const;
  private readonly assignHead: QHead;
  private readonly ttiHead: QHead;
  private readonly machinery: DqnMachinery;
  private readonly rng: Rng;
  private readonly normalize: (obs: number[]) => number[];
  private readonly assignSize: number;
  private readonly cfg: AgentConfig;
  private epsilon: number;

  constructor(private readonly spec: SpecMessage, cfg: AgentConfig) {
    this.cfg = cfg;
    this.rng = new Rng(cfg.seed);
    this.normalize = makeNormalizer(spec);
    const obsSize = spec.observation_layout.length;
    this.assignSize = assignmentSpaceSize(spec.users, spec.subchannels);
    this.assignHead = makeHead(obsSize, this.assignSize, cfg, this.rng, (e) => e[0]);
    this.ttiHead = makeHead(
      obsSize, spec.tti_levels_s.length, cfg, this.rng, (e) => e[1],
    );
    this.machinery = new DqnMachinery(
      [this.assignHead, this.ttiHead], cfg, this.rng, cfg.nStep,
    );
    this.epsilon = cfg.exploreStart;
  }

  act(obs: number[], explore: boolean): ActResult {
    const x = this.normalize(obs);
    // independent per-head exploration: each head's values are then
    // estimated mostly under the other head's greedy choice, which keeps
    // the marginal credit assignment clean
    const assignmentIndex = explore && this.rng.next() < this.epsilon
      ? this.rng.int(this.assignSize)
      : greedyAction(this.assignHead, x);
    const ttiIndex = explore && this.rng.next() < this.epsilon
      ? this.rng.int(this.spec.tti_levels_s.length)
      : greedyAction(this.ttiHead, x);
    return {
      assignment: decodeAssignment(assignmentIndex, this.spec.users, this.spec.subchannels),
      ttiIndex,
      encoded: [assignmentIndex, ttiIndex],
    };
  }

  observe(t: AgentTransition): void {
    this.machinery.observe({
      obs: this.normalize(t.obs),
      encoded: t.encoded,
      reward: t.reward,
      nextObs: this.normalize(t.nextObs),
      done: t.done,
    });
  }

  onEpisodeEnd(episode: number): void {
    this.epsilon = epsilonAt(this.cfg, episode);
    this.machinery.lrScale = lrScaleAt(this.cfg, episode);
  }

  checkpoint(): unknown {
    return {
      kind: this.kind,
      assignment_q: this.assignHead.online.toJSON(),
      tti_q: this.ttiHead.online.toJSON(),
    };
  }
}
