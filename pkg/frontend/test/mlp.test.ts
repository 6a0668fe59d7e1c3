import { describe, expect, it } from "vitest";

import { Mlp } from "../src/mlp.js";
import { Rng } from "../src/rng.js";

describe("rng", () => {
  it("is deterministic per seed", () => {
    const a = new Rng(42);
    const b = new Rng(42);
    for (let i = 0; i < 100; i++) expect(a.next()).toBe(b.next());
  });

  it("covers the unit interval and integer ranges", () => {
    const r = new Rng(7);
    const counts = new Array(10).fill(0);
    for (let i = 0; i < 10000; i++) counts[r.int(10)]++;
    for (const c of counts) expect(c).toBeGreaterThan(700);
  });

  it("gauss has roughly unit variance", () => {
    const r = new Rng(3);
    let sum = 0;
    let sq = 0;
    const n = 20000;
    for (let i = 0; i < n; i++) {
      const g = r.gauss();
      sum += g;
      sq += g * g;
    }
    expect(sum / n).toBeCloseTo(0, 1);
    expect(sq / n).toBeCloseTo(1, 1);
  });
});

describe("mlp", () => {
  it("gradients match finite differences", () => {
    const rng = new Rng(5);
    const net = new Mlp([3, 8, 2], rng);
    const x = [0.3, -0.8, 0.5];
    const gradOut = [1.0, -2.0];

    const loss = () => {
      const y = net.forward(x);
      return y[0] * gradOut[0] + y[1] * gradOut[1];
    };

    net.clearGrads();
    net.forward(x);
    const gradIn = net.backward(gradOut);

    // finite-difference check on the input gradient
    const eps = 1e-6;
    for (let i = 0; i < x.length; i++) {
      const orig = x[i];
      x[i] = orig + eps;
      const up = loss();
      x[i] = orig - eps;
      const down = loss();
      x[i] = orig;
      expect(gradIn[i]).toBeCloseTo((up - down) / (2 * eps), 5);
    }
  });

  it("learns a tiny regression problem", () => {
    const rng = new Rng(9);
    const net = new Mlp([2, 16, 1], rng);
    const data: Array<[number[], number]> = [];
    for (let i = 0; i < 64; i++) {
      const a = rng.uniform(-1, 1);
      const b = rng.uniform(-1, 1);
      data.push([[a, b], a * 0.5 - b * 0.25]);
    }
    const mse = () =>
      data.reduce((s, [x, t]) => s + (net.forward(x)[0] - t) ** 2, 0) / data.length;
    const before = mse();
    for (let epoch = 0; epoch < 200; epoch++) {
      net.clearGrads();
      for (const [x, t] of data) {
        const y = net.forward(x)[0];
        net.backward([y - t]);
      }
      net.adamStep(1e-2);
    }
    expect(mse()).toBeLessThan(before / 50);
  });

  it("clones, syncs, and serializes", () => {
    const net = new Mlp([4, 8, 3], new Rng(11));
    const clone = net.clone();
    const x = [0.1, 0.2, 0.3, 0.4];
    expect(Array.from(clone.forward(x))).toEqual(Array.from(net.forward(x)));

    const other = new Mlp([4, 8, 3], new Rng(12));
    other.copyFrom(net);
    expect(Array.from(other.forward(x))).toEqual(Array.from(net.forward(x)));

    const revived = Mlp.fromJSON(JSON.parse(JSON.stringify(net.toJSON())));
    expect(Array.from(revived.forward(x))).toEqual(Array.from(net.forward(x)));
  });

  it("soft update interpolates parameters", () => {
    const a = new Mlp([2, 4, 1], new Rng(1));
    const b = new Mlp([2, 4, 1], new Rng(2));
    const x = [0.5, -0.5];
    const before = a.forward(x)[0];
    const target = b.forward(x)[0];
    a.softUpdateFrom(b, 1.0); // tau=1 copies outright
    expect(a.forward(x)[0]).toBeCloseTo(target, 12);
    expect(a.forward(x)[0]).not.toBeCloseTo(before, 2);
  });
});
