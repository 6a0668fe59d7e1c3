/**
 * Action-space arithmetic for the bridge: a flat subchannel->user
 * assignment index in [0, users^subchannels), a TTI level index, and
 * the joint product space. Also the continuous->discrete projections a
 * DDPG actor needs; every projected action is legal by construction.
 */

export function assignmentSpaceSize(users: number, subchannels: number): number {
  return Math.pow(users, subchannels);
}

export function jointSpaceSize(users: number, subchannels: number, levels: number): number {
  return assignmentSpaceSize(users, subchannels) * levels;
}

/** Decode a flat index into one user per subchannel (base-`users` digits). */
export function decodeAssignment(index: number, users: number, subchannels: number): number[] {
  const size = assignmentSpaceSize(users, subchannels);
  if (index < 0 || index >= size) throw new Error(`assignment index ${index} out of range`);
  const out = new Array<number>(subchannels);
  let rest = index;
  for (let s = 0; s < subchannels; s++) {
    out[s] = rest % users;
    rest = Math.floor(rest / users);
  }
  return out;
}

export function encodeAssignment(assignment: number[], users: number): number {
  let index = 0;
  for (let s = assignment.length - 1; s >= 0; s--) {
    const u = assignment[s];
    if (u < 0 || u >= users) throw new Error(`user ${u} out of range`);
    index = index * users + u;
  }
  return index;
}

export function splitJointIndex(
  index: number, users: number, subchannels: number, levels: number,
): { assignmentIndex: number; ttiIndex: number } {
  const aSpace = assignmentSpaceSize(users, subchannels);
  if (index < 0 || index >= aSpace * levels) {
    throw new Error(`joint index ${index} out of range`);
  }
  return { assignmentIndex: index % aSpace, ttiIndex: Math.floor(index / aSpace) };
}

export function joinIndices(
  assignmentIndex: number, ttiIndex: number, users: number, subchannels: number,
): number {
  return ttiIndex * assignmentSpaceSize(users, subchannels) + assignmentIndex;
}

/**
 * Project per-subchannel user logits (subchannels x users, row-major)
 * onto a legal assignment: argmax per subchannel.
 */
export function projectAssignmentLogits(
  logits: ArrayLike<number>, users: number, subchannels: number,
): number[] {
  if (logits.length !== users * subchannels) {
    throw new Error(`logits length ${logits.length}, expected ${users * subchannels}`);
  }
  const out = new Array<number>(subchannels);
  for (let s = 0; s < subchannels; s++) {
    let best = 0;
    let bestVal = -Infinity;
    for (let u = 0; u < users; u++) {
      const v = logits[s * users + u];
      if (v > bestVal) {
        bestVal = v;
        best = u;
      }
    }
    out[s] = best;
  }
  return out;
}

/** Map a continuous knob in [0, 1] to the nearest TTI level index. */
export function nearestLevelIndex(value01: number, levelCount: number): number {
  const clamped = Math.min(1, Math.max(0, value01));
  return Math.min(levelCount - 1, Math.round(clamped * (levelCount - 1)));
}

export function assertLegalAction(
  assignment: number[], ttiIndex: number, users: number, subchannels: number, levels: number,
): void {
  if (assignment.length !== subchannels) {
    throw new Error(`assignment names ${assignment.length} subchannels, expected ${subchannels}`);
  }
  for (const u of assignment) {
    if (!Number.isInteger(u) || u < 0 || u >= users) {
      throw new Error(`illegal user ${u} in assignment`);
    }
  }
  if (!Number.isInteger(ttiIndex) || ttiIndex < 0 || ttiIndex >= levels) {
    throw new Error(`illegal tti index ${ttiIndex}`);
  }
}
