import { describe, expect, it } from "vitest";

import { ecdf, runningMean } from "../src/stats.js";

describe("runningMean", () => {
  it("averages a trailing window", () => {
    // window 2 over [2, 4, 6]: [2, 3, 5]
    expect(runningMean([2, 4, 6], 2)).toEqual([2, 3, 5]);
  });

  it("covers the whole prefix before the window fills", () => {
    expect(runningMean([2, 4, 6], 10)).toEqual([2, 3, 4]);
  });

  it("window 1 is the identity", () => {
    expect(runningMean([5, 1, 9], 1)).toEqual([5, 1, 9]);
  });

  it("keeps a constant series flat", () => {
    expect(runningMean([3, 3, 3, 3], 3)).toEqual([3, 3, 3, 3]);
  });

  it("rejects nonpositive windows", () => {
    expect(() => runningMean([1], 0)).toThrow(RangeError);
    expect(() => runningMean([1], 1.5)).toThrow(RangeError);
  });
});

describe("ecdf", () => {
  it("single repeated value gives the pure step", () => {
    expect(ecdf([5, 5, 5])).toEqual({ x: [5, 5], y: [0, 1] });
  });

  it("two values give a staircase", () => {
    expect(ecdf([2, 1])).toEqual({ x: [1, 1, 2, 2], y: [0, 0.5, 0.5, 1] });
  });

  it("is invariant to input order", () => {
    const sorted = [1, 2, 3, 4, 5];
    const shuffled = [4, 1, 5, 3, 2];
    expect(ecdf(shuffled)).toEqual(ecdf(sorted));
  });

  it("starts at 0, ends at 1, never decreases", () => {
    let state = 12345;
    const next = () => {
      // LCG keeps the test self-contained and reproducible
      state = (state * 1103515245 + 12345) % 2147483648;
      return state / 2147483648;
    };
    for (let trial = 0; trial < 20; trial++) {
      const n = 1 + Math.floor(next() * 40);
      const samples = Array.from({ length: n }, () => Math.round(next() * 10) - 5);
      const { x, y } = ecdf(samples);
      expect(y[0]).toBe(0);
      expect(y[y.length - 1]).toBe(1);
      for (let i = 1; i < y.length; i++) {
        expect(y[i]).toBeGreaterThanOrEqual(y[i - 1]!);
        expect(x[i]).toBeGreaterThanOrEqual(x[i - 1]!);
      }
    }
  });

  it("rejects empty input", () => {
    expect(() => ecdf([])).toThrow(RangeError);
  });
});
