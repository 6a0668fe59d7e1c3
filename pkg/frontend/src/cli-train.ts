/**
 * Train one agent against a spawned bridge and write its curve.
 *
 *   node dist/cli-train.js --agent multi_dqn --scenario ../scenarios/bridge-train.scn \
 *       --out out/multi --episodes 400 --seed 7
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { BridgeClient } from "./bridge-client.js";
import { harnessConfig, TRAIN_LEVELS_S, TRAIN_SCENARIO } from "./configs.js";
import { spawnBridge } from "./spawn-bridge.js";
import { curveToCsv, trainAgent } from "./train.js";
import type { AgentKind } from "./agents/types.js";

async function main(): Promise<number> {
  const { values } = parseArgs({
    options: {
      agent: { type: "string" },
      scenario: { type: "string", default: TRAIN_SCENARIO },
      out: { type: "string" },
      episodes: { type: "string" },
      "eval-interval": { type: "string" },
      seed: { type: "string" },
      levels: { type: "string" },
      quiet: { type: "boolean", default: false },
    },
  });
  const kind = values.agent as AgentKind | undefined;
  if (!kind || !["ddpg", "multi_dqn", "single_dqn", "random"].includes(kind)) {
    console.error("--agent must be ddpg | multi_dqn | single_dqn | random");
    return 2;
  }
  if (!values.out) {
    console.error("--out directory is required");
    return 2;
  }
  const cfg = harnessConfig(kind);
  if (values.episodes) cfg.episodeBudget = Number(values.episodes);
  if (values["eval-interval"]) cfg.evalInterval = Number(values["eval-interval"]);
  if (values.seed) cfg.seed = Number(values.seed);
  const levels = values.levels
    ? values.levels.split(",").map(Number)
    : TRAIN_LEVELS_S;

  const bridge = spawnBridge(values.scenario!, levels);
  try {
    const client = await BridgeClient.connect(bridge.host, bridge.port);
    const spec = await client.hello();
    const result = await trainAgent(client, spec, cfg, {
      log: values.quiet ? () => {} : (m) => console.log(m),
    });
    await client.close();

    fs.mkdirSync(values.out, { recursive: true });
    fs.writeFileSync(path.join(values.out, "curve.csv"), curveToCsv(result.curve));
    fs.writeFileSync(
      path.join(values.out, "result.json"),
      JSON.stringify(
        {
          kind: result.kind,
          curve: result.curve,
          evalProtocol: result.evalProtocol,
          episodes: result.episodes,
          trainSeconds: result.trainSeconds,
        },
        null,
        2,
      ) + "\n",
    );
    fs.writeFileSync(
      path.join(values.out, "checkpoint.json"),
      JSON.stringify(result.checkpoint) + "\n",
    );
    console.log(
      `${kind}: final eval return ` +
        `${result.curve[result.curve.length - 1].meanReturn.toFixed(6)} ` +
        `in ${result.trainSeconds.toFixed(1)}s`,
    );
    return 0;
  } finally {
    await bridge.stop();
  }
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(err);
    process.exit(1);
  },
);
