import { describe, expect, it } from "vitest";

import { compare, convergenceEpisode, plateauValue } from "../src/compare.js";
import type { CurvePoint, TrainingResult } from "../src/train.js";

function curveOf(returns: number[], interval = 10): CurvePoint[] {
  return returns.map((r, i) => ({
    episode: i * interval,
    meanReturn: r,
    wallSeconds: i,
  }));
}

function resultOf(kind: string, returns: number[]): TrainingResult {
  return {
    kind: kind as TrainingResult["kind"],
    curve: curveOf(returns),
    evalProtocol: { seeds: [1, 2, 3], interval: 10 },
    checkpoint: null,
    episodes: (returns.length - 1) * 10,
    trainSeconds: returns.length,
  };
}

describe("plateau detection", () => {
  it("plateau is the mean of the last three evaluations", () => {
    expect(plateauValue(curveOf([-9, -5, -2, -2.1, -1.9]))).toBeCloseTo(-2, 10);
  });

  it("convergence is the first evaluation of three inside the 5% band", () => {
    const curve = curveOf([-10, -8, -4, -2.05, -2.0, -1.95]);
    expect(convergenceEpisode(curve)).toBe(30);
  });

  it("a curve that never settles converges at its last point", () => {
    const curve = curveOf([-10, -2, -10, -2, -10, -2]);
    expect(convergenceEpisode(curve)).toBe(50);
  });
});

describe("comparison", () => {
  it("identical curves give ratio 1.0", () => {
    const a = resultOf("multi_dqn", [-10, -4, -2, -2, -2]);
    const b = resultOf("ddpg", [-10, -4, -2, -2, -2]);
    const report = compare([a, b]);
    expect(report.ratios["multi_dqn/ddpg"]).toBeCloseTo(1.0, 12);
  });

  it("faster convergence shows as ratio < 1", () => {
    const fast = resultOf("multi_dqn", [-10, -2, -2, -2, -2, -2]);
    const slow = resultOf("ddpg", [-10, -8, -6, -4, -2, -2, -2, -2]);
    const report = compare([fast, slow]);
    expect(report.ratios["multi_dqn/ddpg"]).toBeLessThan(1.0);
  });

  it("refuses mismatched evaluation protocols", () => {
    const a = resultOf("multi_dqn", [-3, -2, -2, -2]);
    const b = resultOf("ddpg", [-3, -2, -2, -2]);
    b.evalProtocol = { seeds: [4, 5, 6], interval: 10 };
    expect(() => compare([a, b])).toThrow(/different evaluation protocol/);
  });
});
