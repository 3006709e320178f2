import * as tf from '@tensorflow/tfjs'

import { LabeledImage, imageBatch } from './extract.js'
import { Extractor, setBackboneTrainable } from './model.js'

export interface StageReport {
  epochs: number
  learningRate: number
  finalLoss: number | null
}

export interface FineTuneReport {
  stage1: StageReport
  stage2: StageReport
}

function oneHotLabels(images: LabeledImage[], roster: string[]): tf.Tensor2D {
  const indices = images.map((img) => {
    const idx = roster.indexOf(img.subject)
    if (idx < 0) {
      throw new Error(
        `label subject ${JSON.stringify(img.subject)} is not in the configured roster`,
      )
    }
    return idx
  })
  return tf.oneHot(tf.tensor1d(indices, 'int32'), roster.length) as tf.Tensor2D
}

async function fitStage(
  extractor: Extractor,
  xs: tf.Tensor4D,
  ys: tf.Tensor2D,
  epochs: number,
  learningRate: number,
): Promise<number | null> {
  if (epochs === 0) return null
  extractor.classifier.compile({
    optimizer: tf.train.adam(learningRate),
    loss: 'categoricalCrossentropy',
  })
  const history = await extractor.classifier.fit(xs, ys, {
    epochs,
    batchSize: Math.min(32, xs.shape[0]),
    shuffle: true,
    verbose: 0,
  })
  const losses = history.history.loss as number[]
  return losses[losses.length - 1]
}

export interface StageOverrides {
  stage1?: Partial<import('./config.js').StageParams>
  stage2?: Partial<import('./config.js').StageParams>
}

/**
 * Two-stage transfer training on the classification output.
 *
 * Stage 1 trains only the replaced head (backbone frozen) at the higher
 * learning rate; stage 2 unfreezes everything and continues at the small
 * learning rate. Either stage can be skipped with epochs = 0, so the
 * stages can also be run one at a time. Stage boundaries, epochs, and
 * rates come from the config (optionally overridden per call) and are
 * what the extraction manifest logs.
 */
export async function fineTune(
  extractor: Extractor, images: LabeledImage[], overrides: StageOverrides = {},
): Promise<FineTuneReport> {
  const config = extractor.config
  const stage1 = { ...config.stage1, ...overrides.stage1 }
  const stage2 = { ...config.stage2, ...overrides.stage2 }
  if (images.length === 0) throw new Error('no training images')
  const { xs } = imageBatch(images, config)
  const ys = oneHotLabels(images, config.roster)
  try {
    setBackboneTrainable(extractor, false)
    const loss1 = await fitStage(extractor, xs, ys, stage1.epochs, stage1.learningRate)
    setBackboneTrainable(extractor, true)
    const loss2 = await fitStage(extractor, xs, ys, stage2.epochs, stage2.learningRate)
    return {
      stage1: { epochs: stage1.epochs, learningRate: stage1.learningRate, finalLoss: loss1 },
      stage2: { epochs: stage2.epochs, learningRate: stage2.learningRate, finalLoss: loss2 },
    }
  } finally {
    xs.dispose()
    ys.dispose()
  }
}
