/**
 * Single-DQN: one value network over the full joint action space
 * (users^subchannels * levels indices). Simple, but the action count
 * explodes with the problem size, which is exactly what slows it down.
 */

import type { SpecMessage } from "../bridge-client.js";
import { decodeAssignment, jointSpaceSize, splitJointIndex } from "../actions.js";
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

export class SingleDqnAgent implements Agent {
  readonly kind = "single_dqn" as const;
  private readonly head: QHead;
  private readonly machinery: DqnMachinery;
  private readonly rng: Rng;
  private readonly normalize: (obs: number[]) => number[];
  private readonly jointSize: number;
  private epsilon: number;

  constructor(private readonly spec: SpecMessage, cfg: AgentConfig) {
    this.rng = new Rng(cfg.seed);
    this.normalize = makeNormalizer(spec);
    const obsSize = spec.observation_layout.length;
    this.jointSize = jointSpaceSize(spec.users, spec.subchannels, spec.tti_levels_s.length);
    this.head = makeHead(obsSize, this.jointSize, cfg, this.rng, (e) => e[0]);
    this.machinery = new DqnMachinery([this.head], cfg, this.rng, cfg.nStep);
    this.epsilon = cfg.exploreStart;
    this.cfg = cfg;
  }

  private readonly cfg: AgentConfig;

  act(obs: number[], explore: boolean): ActResult {
    const x = this.normalize(obs);
    const joint =
      explore && this.rng.next() < this.epsilon
        ? this.rng.int(this.jointSize)
        : greedyAction(this.head, x);
    const { assignmentIndex, ttiIndex } = splitJointIndex(
      joint, this.spec.users, this.spec.subchannels, this.spec.tti_levels_s.length,
    );
    return {
      assignment: decodeAssignment(assignmentIndex, this.spec.users, this.spec.subchannels),
      ttiIndex,
      encoded: [joint],
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
    return { kind: this.kind, q: this.head.online.toJSON() };
  }
}
