export type Backbone = 'inception_v3' | 'xception' | 'mobilenet'

export type Stage = 'features_only' | 'fine_tuned'

export interface StageParams {
  epochs: number
  learningRate: number
}

export interface ExtractorConfig {
  backbone: Backbone
  stage: Stage
  /** ordered subject roster; defines the score index -> subject mapping */
  roster: string[]
  /** square input size; defaults to the backbone's native resolution */
  inputResolution?: number
  /** deterministic weight-init seed */
  seed?: number
  /** head-only warmup with the backbone frozen */
  stage1?: Partial<StageParams>
  /** full fine-tune at a small learning rate */
  stage2?: Partial<StageParams>
}

export interface ResolvedConfig {
  backbone: Backbone
  stage: Stage
  roster: string[]
  inputResolution: number
  seed: number
  stage1: StageParams
  stage2: StageParams
}

export const FC_UNITS = 512

export const BACKBONE_INPUT_RESOLUTION: Record<Backbone, number> = {
  inception_v3: 299,
  xception: 299,
  mobilenet: 224,
}

const DEFAULT_STAGE1: StageParams = { epochs: 5, learningRate: 1e-3 }
const DEFAULT_STAGE2: StageParams = { epochs: 3, learningRate: 1e-5 }

export function resolveConfig(config: ExtractorConfig): ResolvedConfig {
  if (!(config.backbone in BACKBONE_INPUT_RESOLUTION)) {
    throw new Error(`unknown backbone ${JSON.stringify(config.backbone)}`)
  }
  if (config.roster.length === 0) {
    throw new Error('subject roster is empty')
  }
  if (new Set(config.roster).size !== config.roster.length) {
    throw new Error('subject roster contains duplicates')
  }
  const inputResolution = config.inputResolution ?? BACKBONE_INPUT_RESOLUTION[config.backbone]
  if (!(Number.isInteger(inputResolution) && inputResolution >= 8)) {
    throw new Error(`input resolution must be an integer >= 8, got ${inputResolution}`)
  }
  return {
    backbone: config.backbone,
    stage: config.stage,
    roster: [...config.roster],
    inputResolution,
    seed: config.seed ?? 1,
    stage1: { ...DEFAULT_STAGE1, ...config.stage1 },
    stage2: { ...DEFAULT_STAGE2, ...config.stage2 },
  }
}
