/** Spawn the Python bridge server as a subprocess for training runs. */

import { spawn, type ChildProcess } from "node:child_process";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

const HERE = path.dirname(fileURLToPath(import.meta.url));

/** Repo root (frontend/dist/.. -> frontend/.. ). */
export const REPO_ROOT = path.resolve(HERE, "..", "..");

export interface BridgeHandle {
  host: string;
  port: number;
  proc: ChildProcess;
  stop(): Promise<void>;
}

export function spawnBridge(
  scenarioPath: string,
  ttiLevelsS: number[],
  { python = process.env.AIRDELAY_PYTHON ?? "python3", port = 0 } = {},
): BridgeHandle {
  const chosenPort = port || 20000 + Math.floor(Math.random() * 20000);
  const host = "127.0.0.1";
  const proc = spawn(
    python,
    [
      "-m", "airdelay.cli", "serve-env",
      "--scenario", scenarioPath,
      "--listen", `${host}:${chosenPort}`,
      "--tti-levels", ttiLevelsS.join(","),
    ],
    { cwd: REPO_ROOT, stdio: ["ignore", "inherit", "inherit"] },
  );
  return {
    host,
    port: chosenPort,
    proc,
    stop: () =>
      new Promise<void>((resolve) => {
        if (proc.exitCode !== null) return resolve();
        proc.once("exit", () => resolve());
        proc.kill("SIGTERM");
        setTimeout(() => {
          if (proc.exitCode === null) proc.kill("SIGKILL");
        }, 2000).unref();
      }),
  };
}
