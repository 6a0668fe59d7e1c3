/**
 * Training loop against the bridge: exploration episodes interleaved
 * with greedy evaluations over a fixed seed set shared by every agent,
 * producing a TrainingCurve of (episode, mean return, wall seconds).
 */

import { BridgeClient, type SpecMessage } from "./bridge-client.js";
import { assertLegalAction } from "./actions.js";
import { DdpgAgent } from "./agents/ddpg.js";
import { MultiDqnAgent } from "./agents/multi-dqn.js";
import { RandomAgent } from "./agents/random-policy.js";
import { SingleDqnAgent } from "./agents/single-dqn.js";
import type { Agent, AgentConfig, AgentKind } from "./agents/types.js";

export interface CurvePoint {
  episode: number;
  meanReturn: number;
  wallSeconds: number;
}

export interface EvalProtocol {
  seeds: number[];
  interval: number;
}

export interface TrainingResult {
  kind: AgentKind;
  curve: CurvePoint[];
  evalProtocol: EvalProtocol;
  checkpoint: unknown;
  episodes: number;
  trainSeconds: number;
}

export function makeAgent(spec: SpecMessage, cfg: AgentConfig): Agent {
  switch (cfg.kind) {
    case "ddpg":
      return new DdpgAgent(spec, cfg);
    case "multi_dqn":
      return new MultiDqnAgent(spec, cfg);
    case "single_dqn":
      return new SingleDqnAgent(spec, cfg);
    case "random":
      return new RandomAgent(spec, cfg);
  }
}

export async function runEpisode(
  client: BridgeClient,
  spec: SpecMessage,
  agent: Agent,
  seed: number,
  opts: { explore: boolean; learn: boolean; rewardScale: number },
): Promise<number> {
  let obs = await client.reset(seed);
  let episodeReturn = 0;
  let done = false;
  while (!done) {
    const { assignment, ttiIndex, encoded } = agent.act(obs, opts.explore);
    assertLegalAction(
      assignment, ttiIndex, spec.users, spec.subchannels, spec.tti_levels_s.length,
    );
    const reply = await client.step(assignment, ttiIndex);
    episodeReturn += reply.reward;
    if (opts.learn) {
      agent.observe({
        obs,
        encoded,
        reward: reply.reward * opts.rewardScale,
        nextObs: reply.observation,
        done: reply.done,
      });
    }
    obs = reply.observation;
    done = reply.done;
  }
  return episodeReturn;
}

export async function evaluate(
  client: BridgeClient,
  spec: SpecMessage,
  agent: Agent,
  seeds: number[],
): Promise<number> {
  let total = 0;
  for (const seed of seeds) {
    total += await runEpisode(client, spec, agent, seed, {
      explore: false,
      learn: false,
      rewardScale: 1.0,
    });
  }
  return total / seeds.length;
}

export async function trainAgent(
  client: BridgeClient,
  spec: SpecMessage,
  cfg: AgentConfig,
  { log = (_: string) => {} } = {},
): Promise<TrainingResult> {
  const agent = makeAgent(spec, cfg);
  const curve: CurvePoint[] = [];
  const started = Date.now();

  for (let episode = 0; episode < cfg.episodeBudget; episode++) {
    if (episode % cfg.evalInterval === 0) {
      const meanReturn = await evaluate(client, spec, agent, cfg.evalSeeds);
      curve.push({
        episode,
        meanReturn,
        wallSeconds: (Date.now() - started) / 1000,
      });
      log(`${cfg.kind} ep ${episode}: eval return ${meanReturn.toFixed(6)}`);
    }
    const trainSeed = cfg.seed * 1_000_000 + episode;
    await runEpisode(client, spec, agent, trainSeed, {
      explore: true,
      learn: true,
      rewardScale: cfg.rewardScale,
    });
    agent.onEpisodeEnd(episode + 1);
  }
  const finalReturn = await evaluate(client, spec, agent, cfg.evalSeeds);
  curve.push({
    episode: cfg.episodeBudget,
    meanReturn: finalReturn,
    wallSeconds: (Date.now() - started) / 1000,
  });
  log(`${cfg.kind} final: eval return ${finalReturn.toFixed(6)}`);

  return {
    kind: cfg.kind,
    curve,
    evalProtocol: { seeds: [...cfg.evalSeeds], interval: cfg.evalInterval },
    checkpoint: agent.checkpoint(),
    episodes: cfg.episodeBudget,
    trainSeconds: (Date.now() - started) / 1000,
  };
}

export function curveToCsv(curve: CurvePoint[]): string {
  const lines = ["episode,return,seconds"];
  for (const p of curve) {
    lines.push(`${p.episode},${p.meanReturn},${p.wallSeconds}`);
  }
  return lines.join("\n") + "\n";
}
