export {
  PowershapSelector,
  type FeatureStats,
  type LearnerKind,
  type RoundReport,
  type RunReport,
  type SelectionMode,
  type SelectorOptions,
  type TaskKind,
} from "./selector.js";
