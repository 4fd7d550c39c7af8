// Client-side mirrors of the REST payloads. Rendered state always derives
// from the latest successful response; the client never mutates training
// state on its own.

export type SemanticType = "binary" | "number" | "category" | "text";

export interface ColumnSchema {
  name: string;
  detected_type: SemanticType;
  num_missing: number;
  distinct_count: number;
  stats: {
    mean?: number;
    std?: number;
    min?: number;
    max?: number;
    vocabulary?: Record<string, number>;
  } | null;
}

export interface Databag {
  id: string;
  name: string;
  raw_artifact: string;
  columns: ColumnSchema[];
  row_count: number;
  created_at: string;
}

export interface StepRecord {
  id: string;
  status: string;
  attempts: number;
  started_at: string | null;
  finished_at: string | null;
  error_message: string | null;
  outputs: Record<string, { bucket: string; digest: string }>;
}

export interface SplitMetrics {
  loss: number;
  accuracy?: number;
  mse?: number;
  mae?: number;
}

export interface Metrics {
  train: SplitMetrics;
  val: SplitMetrics;
  test: SplitMetrics;
  loss_per_epoch: number[];
  timing?: Record<string, number>;
}

export interface Solution {
  id: string;
  name: string;
  databag_id: string;
  target: string;
  run_id: string;
  created_at: string;
  status: string;
  error: string | null;
  steps: StepRecord[];
  config: string | null;
  best_model: string | null;
  metrics: Metrics | null;
}

export interface RunView {
  id: string;
  template: string;
  status: string;
  steps: StepRecord[];
  created_at: string;
  finished_at: string | null;
  error: string | null;
}

export interface Prediction {
  row: Record<string, unknown>;
  prediction: string | number;
  probabilities: Record<string, number> | null;
}

export const TERMINAL_STATUSES = ["Succeeded", "Failed", "Cancelled"];

export function isTerminal(status: string): boolean {
  return TERMINAL_STATUSES.includes(status);
}
