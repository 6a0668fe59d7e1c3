/**
 * TCP client for the airdelay environment bridge: one JSON object per
 * line, one reply per request, replies in request order.
 */

import * as net from "node:net";
import * as readline from "node:readline";

export interface SpecMessage {
  users: number;
  subchannels: number;
  packet_bits: number;
  period_s: number;
  protocol: string;
  tti_levels_s: number[];
  assignment_space: number;
  tti_space: number;
  drop_penalty_s: number;
  observation_layout: string[];
}

export interface StepReply {
  observation: number[];
  reward: number;
  done: boolean;
  info: { time_s: number; completed: number; dropped: number; step_index: number };
}

export class BridgeError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly request: unknown,
  ) {
    super(`${code}: ${message}`);
  }
}

interface Pending {
  resolve: (msg: Record<string, unknown>) => void;
  reject: (err: Error) => void;
  request: unknown;
}

export class BridgeClient {
  private seq = 0;
  private pending: Pending[] = [];

  private constructor(private readonly socket: net.Socket) {
    const rl = readline.createInterface({ input: socket });
    rl.on("line", (line) => this.onLine(line));
    socket.on("error", (err) => this.failAll(err));
    socket.on("close", () => this.failAll(new Error("bridge connection closed")));
  }

  static async connect(
    host: string, port: number, { retries = 40, delayMs = 250 } = {},
  ): Promise<BridgeClient> {
    let lastErr: Error = new Error("no attempt made");
    for (let i = 0; i < retries; i++) {
      try {
        const socket = await new Promise<net.Socket>((resolve, reject) => {
          const s = net.createConnection({ host, port }, () => {
            s.off("error", reject);
            resolve(s);
          });
          s.on("error", reject);
        });
        socket.setNoDelay(true);
        return new BridgeClient(socket);
      } catch (err) {
        lastErr = err as Error;
        await new Promise((r) => setTimeout(r, delayMs));
      }
    }
    throw new Error(`cannot reach bridge at ${host}:${port}: ${lastErr.message}`);
  }

  private onLine(line: string): void {
    if (!line.trim()) return;
    const msg = JSON.parse(line) as Record<string, unknown>;
    const pending = this.pending.shift();
    if (!pending) return; // unsolicited; protocol never does this
    if (msg.type === "error") {
      pending.reject(
        new BridgeError(String(msg.code), String(msg.message), pending.request),
      );
    } else {
      pending.resolve(msg);
    }
  }

  private failAll(err: Error): void {
    const waiting = this.pending;
    this.pending = [];
    for (const p of waiting) p.reject(err);
  }

  private request(body: Record<string, unknown>): Promise<Record<string, unknown>> {
    const msg = { seq: this.seq++, ...body };
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject, request: msg });
      this.socket.write(JSON.stringify(msg) + "\n");
    });
  }

  async hello(scenarioPath?: string): Promise<SpecMessage> {
    const body: Record<string, unknown> = { type: "hello" };
    if (scenarioPath) body.scenario = scenarioPath;
    return (await this.request(body)) as unknown as SpecMessage;
  }

  async reset(seed: number): Promise<number[]> {
    const reply = await this.request({ type: "reset", seed });
    return reply.observation as number[];
  }

  async step(assignment: number[], ttiIndex: number): Promise<StepReply> {
    const pairs = assignment.map((user, subchannel) => [subchannel, user]);
    const reply = await this.request({
      type: "step",
      action: { assignment: pairs, tti_index: ttiIndex },
    });
    return reply as unknown as StepReply;
  }

  async close(): Promise<void> {
    try {
      await this.request({ type: "close" });
    } catch {
      // the server may already be gone; closing is best-effort
    }
    this.socket.end();
    this.socket.destroy();
  }
}
