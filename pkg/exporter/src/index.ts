export {
  BACKBONE_INPUT_RESOLUTION,
  FC_UNITS,
  resolveConfig,
} from './config.js'
export type {
  Backbone,
  ExtractorConfig,
  ResolvedConfig,
  Stage,
  StageParams,
} from './config.js'
export {
  FC_SOURCE_LAYER,
  backboneChecksum,
  buildExtractor,
  loadWeights,
  preprocess,
  saveWeights,
  setBackboneTrainable,
} from './model.js'
export type { Extractor } from './model.js'
export { extractToFile, imageBatch } from './extract.js'
export type { ExtractResult, LabeledImage } from './extract.js'
export { fineTune } from './finetune.js'
export type { FineTuneReport, StageReport } from './finetune.js'
export { decodeNetpbm, encodePpm } from './ppm.js'
export type { RasterImage } from './ppm.js'
