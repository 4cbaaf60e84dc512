import { spawnSync } from "node:child_process";
import { existsSync, mkdirSync, writeFileSync } from "node:fs";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));
const repoRoot = resolve(here, "..", "..");
const fixtureDir = join(here, ".fixture");
const campaignDir = join(fixtureDir, "campaign");

/**
 * A small 10-drop campaign produced by the simulator CLI, generated once
 * and cached on disk (the simulator is deterministic, so reuse is safe).
 */
export function fixtureCampaign(): string {
  if (existsSync(join(campaignDir, "rates.csv"))) return campaignDir;
  mkdirSync(fixtureDir, { recursive: true });
  const cfg = join(fixtureDir, "sim.cfg");
  writeFileSync(cfg, "run.drops = 10\nrun.seed = 5\n");
  const res = spawnSync(
    "python3",
    ["-m", "mmwavesim.cli", "--config", cfg, "--out", campaignDir],
    { env: { ...process.env, PYTHONPATH: join(repoRoot, "src") }, encoding: "utf8" },
  );
  if (res.status !== 0) {
    throw new Error(`simulator run failed (${res.status}): ${res.stderr}`);
  }
  return campaignDir;
}
