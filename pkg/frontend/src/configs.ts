/** Shipped instances and the agent configurations used by the harness. */

import * as path from "node:path";
import { REPO_ROOT } from "./spawn-bridge.js";
import { defaultConfig, type AgentConfig, type AgentKind } from "./agents/types.js";

export const TOY_SCENARIO = path.join(REPO_ROOT, "scenarios", "bridge-toy.scn");
export const TRAIN_SCENARIO = path.join(REPO_ROOT, "scenarios", "bridge-train.scn");

/** Level sets announced by the bridge for each shipped scenario. */
export const TOY_LEVELS_S = [31.25e-6, 62.5e-6, 125e-6, 250e-6];
export const TRAIN_LEVELS_S = [62.5e-6, 125e-6, 250e-6, 500e-6, 1e-3];

/**
 * Harness configurations for the shipped training instance. Networks are
 * kept small so the whole comparison finishes in minutes; every agent
 * shares the evaluation protocol and the episode budget.
 */
export function harnessConfig(kind: AgentKind): AgentConfig {
  const cfg = defaultConfig(kind);
  cfg.hidden = [64, 64];
  cfg.episodeBudget = 400;
  cfg.evalInterval = 20;
  cfg.seed = 7;
  switch (kind) {
    case "multi_dqn":
      cfg.exploreDecayEpisodes = 80;
      cfg.exploreEnd = 0.02;
      cfg.updatesPerStep = 2;
      break;
    case "single_dqn":
      // the joint space is users^subchannels * levels; give it the same
      // budget and schedule so the dimensionality itself is what hurts
      cfg.exploreDecayEpisodes = 80;
      cfg.updatesPerStep = 2;
      break;
    case "ddpg":
      cfg.exploreStart = 0.5;
      cfg.exploreEnd = 0.08;
      cfg.exploreDecayEpisodes = 280;
      cfg.learningRate = 1e-3;
      cfg.actorLearningRate = 3e-4;
      break;
    case "random":
      cfg.episodeBudget = 150;
      break;
  }
  return cfg;
}
