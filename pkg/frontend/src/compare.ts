/**
 * Convergence comparison across training curves sharing one evaluation
 * protocol. The plateau is the mean of the last three evaluations; the
 * convergence point is the first evaluation from which three consecutive
 * evaluations stay within a 5% band of the plateau.
 */

import type { CurvePoint, EvalProtocol, TrainingResult } from "./train.js";

export const PLATEAU_WINDOW = 3;
export const PLATEAU_BAND = 0.05;

export interface CurveSummary {
  kind: string;
  plateau: number;
  convergenceEpisode: number;
  finalReturn: number;
  trainSeconds: number;
}

export interface ComparisonReport {
  protocol: EvalProtocol;
  agents: CurveSummary[];
  ratios: Record<string, number>;
}

export function plateauValue(curve: CurvePoint[]): number {
  if (curve.length < PLATEAU_WINDOW) {
    throw new Error(`need at least ${PLATEAU_WINDOW} evaluations`);
  }
  const tail = curve.slice(-PLATEAU_WINDOW);
  return tail.reduce((s, p) => s + p.meanReturn, 0) / tail.length;
}

export function convergenceEpisode(curve: CurvePoint[]): number {
  const plateau = plateauValue(curve);
  const band = PLATEAU_BAND * Math.abs(plateau);
  for (let i = 0; i + PLATEAU_WINDOW <= curve.length; i++) {
    let inside = true;
    for (let k = 0; k < PLATEAU_WINDOW; k++) {
      if (Math.abs(curve[i + k].meanReturn - plateau) > band) {
        inside = false;
        break;
      }
    }
    if (inside) return curve[i].episode;
  }
  return curve[curve.length - 1].episode;
}

function sameProtocol(a: EvalProtocol, b: EvalProtocol): boolean {
  return (
    a.interval === b.interval &&
    a.seeds.length === b.seeds.length &&
    a.seeds.every((s, i) => s === b.seeds[i])
  );
}

export function compare(results: TrainingResult[]): ComparisonReport {
  if (results.length < 2) throw new Error("need at least two curves to compare");
  const protocol = results[0].evalProtocol;
  for (const r of results.slice(1)) {
    if (!sameProtocol(protocol, r.evalProtocol)) {
      throw new Error(
        `curve ${r.kind} uses a different evaluation protocol; refusing to compare`,
      );
    }
  }
  const agents = results.map((r) => ({
    kind: r.kind as string,
    plateau: plateauValue(r.curve),
    convergenceEpisode: convergenceEpisode(r.curve),
    finalReturn: r.curve[r.curve.length - 1].meanReturn,
    trainSeconds: r.trainSeconds,
  }));
  const ratios: Record<string, number> = {};
  for (const a of agents) {
    for (const b of agents) {
      if (a.kind !== b.kind && b.convergenceEpisode > 0) {
        ratios[`${a.kind}/${b.kind}`] = a.convergenceEpisode / b.convergenceEpisode;
      }
    }
  }
  return { protocol, agents, ratios };
}

export function reportToCsv(report: ComparisonReport): string {
  const lines = ["agent,plateau,convergence_episode,final_return,train_seconds"];
  for (const a of report.agents) {
    lines.push(
      `${a.kind},${a.plateau},${a.convergenceEpisode},${a.finalReturn},${a.trainSeconds}`,
    );
  }
  return lines.join("\n") + "\n";
}
