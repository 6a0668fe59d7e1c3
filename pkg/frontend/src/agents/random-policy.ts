/** Uniform-random policy: the floor every learner must beat. */

import type { SpecMessage } from "../bridge-client.js";
import { assignmentSpaceSize, decodeAssignment } from "../actions.js";
import { Rng } from "../rng.js";
import type { ActResult, Agent, AgentConfig, AgentTransition } from "./types.js";

export class RandomAgent implements Agent {
  readonly kind = "random" as const;
  private readonly rng: Rng;
  private readonly assignSize: number;

  constructor(private readonly spec: SpecMessage, cfg: AgentConfig) {
    this.rng = new Rng(cfg.seed);
    this.assignSize = assignmentSpaceSize(spec.users, spec.subchannels);
  }

  act(_obs: number[], _explore: boolean): ActResult {
    const assignmentIndex = this.rng.int(this.assignSize);
    const ttiIndex = this.rng.int(this.spec.tti_levels_s.length);
    return {
      assignment: decodeAssignment(assignmentIndex, this.spec.users, this.spec.subchannels),
      ttiIndex,
      encoded: [assignmentIndex, ttiIndex],
    };
  }

  observe(_t: AgentTransition): void {}

  onEpisodeEnd(_episode: number): void {}

  checkpoint(): unknown {
    return { kind: this.kind };
  }
}
