// Shapes of the /v1 wire contract. The UI never computes metric values
// itself; everything numeric below is displayed as received.

export interface DatasetInfo {
  id: string;
  protected_attributes: string[];
}

export interface MetricInfo {
  id: string;
  kind: "dataset" | "individual" | "classification";
  ideal: number | null;
  greater_is_fairer: boolean;
  definition: string;
  fair_range: [number, number] | null;
}

export interface AlgorithmInfo {
  id: string;
  category: "pre" | "in" | "post";
  summary: string;
}

export interface Catalogs {
  datasets: DatasetInfo[];
  metrics: MetricInfo[];
  algorithms: AlgorithmInfo[];
  default_metrics: string[];
}

export interface Explanation {
  meta: { name: string; definition: string; ideal: number | null };
  stats: Record<string, number | string | null>;
  text: string;
}

export interface MetricEntry {
  metric_id: string;
  // null value comes with a flag saying why
  value: number | null;
  flag: "infinite" | "undefined" | null;
  ideal: number | null;
  fair_range: [number, number] | null;
  fair: boolean | null;
  explanation: Explanation;
}

export interface BiasReport {
  dataset: string;
  protected: string | null;
  privileged: string;
  unprivileged: string;
  metrics: string[];
  algorithm: string | null;
  seed: number;
  before: { metrics: MetricEntry[] };
  after?: { metrics: MetricEntry[] };
  accuracy: {
    balanced_accuracy_before: number;
    balanced_accuracy_after: number;
  };
  provenance: Record<string, string | number | null>;
}

export interface ReportResponse {
  report: BiasReport;
  cached: boolean;
}

export interface ReportRequest {
  dataset: string;
  protected: string;
  algorithm?: string;
  seed: number;
}

export interface ErrorEnvelope {
  error: { code: string; stage: string; message: string };
}
