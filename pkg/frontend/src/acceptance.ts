/**
 * Convergence-ordering harness on the shipped training instance.
 *
 * Trains DDPG, Multi-DQN, and Single-DQN against the bridge with one
 * shared evaluation protocol, measures the uniform-random floor, and
 * checks the orderings:
 *   - plateau(Multi-DQN) >= plateau(DDPG) - 5%
 *   - plateau(Single-DQN) < plateau(Multi-DQN)
 *   - convergence-episode ratio Multi-DQN / DDPG < 1
 *   - every learner's plateau beats the random policy
 * The Multi-DQN/DDPG convergence ratio is reported, not gated.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { BridgeClient } from "./bridge-client.js";
import { compare, reportToCsv, type ComparisonReport } from "./compare.js";
import { harnessConfig, TRAIN_LEVELS_S, TRAIN_SCENARIO } from "./configs.js";
import { spawnBridge } from "./spawn-bridge.js";
import { curveToCsv, evaluate, makeAgent, runEpisode, trainAgent, type TrainingResult } from "./train.js";
import type { AgentKind } from "./agents/types.js";

const LEARNERS: AgentKind[] = ["ddpg", "multi_dqn", "single_dqn"];

interface Check {
  name: string;
  pass: boolean;
  detail: string;
}

async function measureRandomFloor(outDir: string): Promise<number> {
  const cfg = harnessConfig("random");
  const bridge = spawnBridge(TRAIN_SCENARIO, TRAIN_LEVELS_S);
  try {
    const client = await BridgeClient.connect(bridge.host, bridge.port);
    const spec = await client.hello();
    const agent = makeAgent(spec, cfg);
    let total = 0;
    for (let ep = 0; ep < cfg.episodeBudget; ep++) {
      total += await runEpisode(client, spec, agent, 500_000 + ep, {
        explore: true, learn: false, rewardScale: 1.0,
      });
    }
    const evalMean = await evaluate(client, spec, agent, cfg.evalSeeds);
    await client.close();
    const mean = total / cfg.episodeBudget;
    fs.writeFileSync(
      path.join(outDir, "random-floor.json"),
      JSON.stringify({ episodes: cfg.episodeBudget, meanReturn: mean,
                       evalSeedReturn: evalMean }, null, 2) + "\n",
    );
    return mean;
  } finally {
    await bridge.stop();
  }
}

async function trainOne(kind: AgentKind, outDir: string): Promise<TrainingResult> {
  const cfg = harnessConfig(kind);
  const bridge = spawnBridge(TRAIN_SCENARIO, TRAIN_LEVELS_S);
  try {
    const client = await BridgeClient.connect(bridge.host, bridge.port);
    const spec = await client.hello();
    const result = await trainAgent(client, spec, cfg, {
      log: (m) => console.log(`  ${m}`),
    });
    await client.close();
    const dir = path.join(outDir, kind);
    fs.mkdirSync(dir, { recursive: true });
    fs.writeFileSync(path.join(dir, "curve.csv"), curveToCsv(result.curve));
    fs.writeFileSync(
      path.join(dir, "result.json"),
      JSON.stringify({ ...result, checkpoint: undefined }, null, 2) + "\n",
    );
    fs.writeFileSync(
      path.join(dir, "checkpoint.json"), JSON.stringify(result.checkpoint) + "\n",
    );
    return result;
  } finally {
    await bridge.stop();
  }
}

function runChecks(report: ComparisonReport, randomFloor: number): Check[] {
  const byKind = new Map(report.agents.map((a) => [a.kind, a]));
  const ddpg = byKind.get("ddpg")!;
  const multi = byKind.get("multi_dqn")!;
  const single = byKind.get("single_dqn")!;
  const band = 0.05 * Math.abs(ddpg.plateau);
  const ratio = multi.convergenceEpisode / Math.max(1, ddpg.convergenceEpisode);
  return [
    {
      name: "plateau(multi_dqn) >= plateau(ddpg) - 5%",
      pass: multi.plateau >= ddpg.plateau - band,
      detail: `multi ${multi.plateau.toFixed(6)} vs ddpg ${ddpg.plateau.toFixed(6)}`,
    },
    {
      name: "plateau(single_dqn) < plateau(multi_dqn)",
      pass: single.plateau < multi.plateau,
      detail: `single ${single.plateau.toFixed(6)} vs multi ${multi.plateau.toFixed(6)}`,
    },
    {
      name: "convergence ratio multi_dqn/ddpg < 1",
      pass: ratio < 1.0,
      detail: `episodes ${multi.convergenceEpisode} / ${ddpg.convergenceEpisode} = ${ratio.toFixed(3)} (reported, ~1/10 in the large)`,
    },
    {
      name: "all learners beat the random policy",
      pass: [ddpg, multi, single].every((a) => a.plateau > randomFloor),
      detail: `floor ${randomFloor.toFixed(6)}; plateaus ` +
        [ddpg, multi, single].map((a) => a.plateau.toFixed(6)).join(", "),
    },
  ];
}

async function main(): Promise<number> {
  const { values } = parseArgs({
    options: { out: { type: "string", default: "out/acceptance" } },
  });
  const outDir = values.out!;
  fs.mkdirSync(outDir, { recursive: true });
  const started = Date.now();

  console.log("measuring the uniform-random floor...");
  const randomFloor = await measureRandomFloor(outDir);
  console.log(`random floor: ${randomFloor.toFixed(6)}`);

  const results: TrainingResult[] = [];
  for (const kind of LEARNERS) {
    console.log(`training ${kind}...`);
    results.push(await trainOne(kind, outDir));
  }

  const report = compare(results);
  fs.writeFileSync(
    path.join(outDir, "comparison.json"), JSON.stringify(report, null, 2) + "\n",
  );
  fs.writeFileSync(path.join(outDir, "comparison.csv"), reportToCsv(report));

  const checks = runChecks(report, randomFloor);
  let failed = 0;
  for (const c of checks) {
    console.log(`[A7] ${c.pass ? "PASS" : "FAIL"} ${c.name} (${c.detail})`);
    if (!c.pass) failed += 1;
  }
  const elapsed = (Date.now() - started) / 1000;
  console.log(`total wall time: ${elapsed.toFixed(0)}s`);
  fs.writeFileSync(
    path.join(outDir, "checks.json"),
    JSON.stringify({ checks, randomFloor, wallSeconds: elapsed }, null, 2) + "\n",
  );
  return failed === 0 ? 0 : 1;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(err);
    process.exit(1);
  },
);
