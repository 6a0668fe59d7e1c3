/**
 * Compare training curves produced by cli-train.
 *
 *   node dist/cli-compare.js --out out/report out/ddpg out/multi out/single
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { compare, reportToCsv } from "./compare.js";
import type { TrainingResult } from "./train.js";

function loadResult(dir: string): TrainingResult {
  const raw = JSON.parse(fs.readFileSync(path.join(dir, "result.json"), "utf-8"));
  return { ...raw, checkpoint: null } as TrainingResult;
}

async function main(): Promise<number> {
  const { values, positionals } = parseArgs({
    options: { out: { type: "string" } },
    allowPositionals: true,
  });
  if (!values.out || positionals.length < 2) {
    console.error("usage: cli-compare --out <dir> <result-dir> <result-dir> [...]");
    return 2;
  }
  const report = compare(positionals.map(loadResult));
  fs.mkdirSync(values.out, { recursive: true });
  fs.writeFileSync(
    path.join(values.out, "comparison.json"),
    JSON.stringify(report, null, 2) + "\n",
  );
  fs.writeFileSync(path.join(values.out, "comparison.csv"), reportToCsv(report));
  for (const a of report.agents) {
    console.log(
      `${a.kind}: plateau ${a.plateau.toFixed(6)}, ` +
        `converged at episode ${a.convergenceEpisode}`,
    );
  }
  return 0;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(err);
    process.exit(1);
  },
);
