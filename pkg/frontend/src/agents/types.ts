import type { SpecMessage } from "../bridge-client.js";

export type AgentKind = "ddpg" | "multi_dqn" | "single_dqn" | "random";

export interface AgentConfig {
  kind: AgentKind;
  hidden: number[];          // widths of the hidden layers
  replayCapacity: number;
  batchSize: number;
  discount: number;
  // exploration schedule: epsilon for the DQNs, gaussian sigma for DDPG
  exploreStart: number;
  exploreEnd: number;
  exploreDecayEpisodes: number;
  learningRate: number;      // DQN nets and the DDPG critic
  actorLearningRate: number; // DDPG actor
  lrHalfLifeEpisodes: number; // 0 = constant; else lr halves every this many
  targetSyncSteps: number;   // hard sync period for DQN targets
  tau: number;               // Polyak factor for DDPG targets
  ddpgKickProb: number;      // floor prob of a uniform discrete exploration kick
  nStep: number;             // multi-step backup length shared by all learners
  updatesPerStep: number;    // minibatch updates per environment step
  warmup: number;            // replay size before learning starts
  rewardScale: number;       // seconds -> learning units
  tdClamp: number;
  episodeBudget: number;
  evalInterval: number;
  evalSeeds: number[];
  seed: number;
}

export const DEFAULT_EVAL_SEEDS = [9001, 9002, 9003, 9004, 9005];

export function defaultConfig(kind: AgentKind): AgentConfig {
  return {
    kind,
    hidden: [128, 128],
    // a window of recent experience: stale n-step returns collected under
    // long-gone policies poison the targets
    replayCapacity: 4000,
    batchSize: 32,
    // undiscounted: episodes are one finite period, and discounting would
    // reward stalling (finishing a packet pays -delay now while the larger
    // drop penalty for stalled packets only lands at the period end)
    discount: 1.0,
    exploreStart: kind === "ddpg" ? 0.4 : 1.0,
    exploreEnd: kind === "ddpg" ? 0.05 : 0.05,
    exploreDecayEpisodes: 150,
    learningRate: 1e-3,
    actorLearningRate: 1e-4,
    lrHalfLifeEpisodes: 160,
    targetSyncSteps: 100,
    tau: 0.005,
    ddpgKickProb: 0.0,
    nStep: 5,
    updatesPerStep: 1,
    warmup: 200,
    rewardScale: 1000.0,
    tdClamp: 1.0,
    episodeBudget: 300,
    evalInterval: 10,
    evalSeeds: [...DEFAULT_EVAL_SEEDS],
    seed: 1,
  };
}

export interface ActResult {
  assignment: number[];
  ttiIndex: number;
  /** agent-specific replay encoding of the action taken */
  encoded: number[];
}

export interface AgentTransition {
  obs: number[];
  encoded: number[];
  reward: number; // already scaled to learning units
  nextObs: number[];
  done: boolean;
}

export interface Agent {
  readonly kind: AgentKind;
  act(obs: number[], explore: boolean): ActResult;
  observe(t: AgentTransition): void;
  onEpisodeEnd(episode: number): void;
  checkpoint(): unknown;
}

/**
 * Fixed, spec-derived feature scaling so observations of very different
 * units land in comparable ranges.
 */
export function makeNormalizer(spec: SpecMessage): (obs: number[]) => number[] {
  const u = spec.users;
  const s = spec.subchannels;
  const queueScale = 1.0 / (8 * spec.packet_bits);
  const timeScale = 1.0 / spec.period_s;
  return (obs: number[]) => {
    const out = new Array<number>(obs.length);
    let k = 0;
    for (let i = 0; i < u; i++, k++) out[k] = obs[k] * queueScale;
    for (let i = 0; i < u; i++, k++) out[k] = obs[k] * timeScale;
    for (let i = 0; i < u * s; i++, k++) out[k] = obs[k] / 100.0;
    out[k] = obs[k] * timeScale; // remaining period
    k += 1;
    out[k] = obs[k] / 100.0; // step index
    return out;
  };
}
