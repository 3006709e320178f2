import { createHash } from 'node:crypto'
import { readFileSync, writeFileSync } from 'node:fs'

import * as tf from '@tensorflow/tfjs'

import { FC_UNITS, ResolvedConfig } from './config.js'

/**
 * Extraction model: image batch -> [fc features, class scores].
 *
 * The head replaces whatever top the backbone had: global average pooling,
 * two 512-unit fully-connected layers (ReLU, so the extracted features are
 * non-negative), and a softmax classification layer over the roster. The
 * fc template is read from the second fully-connected layer, the last one
 * before classification.
 */
export interface Extractor {
  config: ResolvedConfig
  model: tf.LayersModel
  /** same layers, classification output only; used for training */
  classifier: tf.LayersModel
}

export const FC_SOURCE_LAYER = 'head_fc2'

class SeedSequence {
  constructor(private next: number) {}
  take(): number {
    return this.next++
  }
}

function backboneStack(
  backbone: ResolvedConfig['backbone'],
  input: tf.SymbolicTensor,
  seeds: SeedSequence,
): tf.SymbolicTensor {
  const glorot = () => tf.initializers.glorotUniform({ seed: seeds.take() })
  const conv = (x: tf.SymbolicTensor, filters: number, kernelSize: number,
                strides: number, name: string) =>
    tf.layers
      .conv2d({
        filters, kernelSize, strides, padding: 'same', activation: 'relu',
        kernelInitializer: glorot(), name: `backbone_${name}`,
      })
      .apply(x) as tf.SymbolicTensor

  if (backbone === 'mobilenet') {
    // depthwise-separable flavor
    let x = conv(input, 8, 3, 2, 'conv1')
    x = tf.layers
      .depthwiseConv2d({
        kernelSize: 3, strides: 1, padding: 'same', activation: 'relu',
        depthwiseInitializer: glorot(), name: 'backbone_dw1',
      })
      .apply(x) as tf.SymbolicTensor
    x = conv(x, 16, 1, 1, 'pw1')
    x = tf.layers
      .depthwiseConv2d({
        kernelSize: 3, strides: 2, padding: 'same', activation: 'relu',
        depthwiseInitializer: glorot(), name: 'backbone_dw2',
      })
      .apply(x) as tf.SymbolicTensor
    return conv(x, 32, 1, 1, 'pw2')
  }
  if (backbone === 'xception') {
    // separable-convolution flavor
    let x = conv(input, 8, 3, 2, 'conv1')
    x = tf.layers
      .separableConv2d({
        filters: 16, kernelSize: 3, strides: 2, padding: 'same', activation: 'relu',
        depthwiseInitializer: glorot(), pointwiseInitializer: glorot(),
        name: 'backbone_sep1',
      })
      .apply(x) as tf.SymbolicTensor
    return tf.layers
      .separableConv2d({
        filters: 32, kernelSize: 3, strides: 1, padding: 'same', activation: 'relu',
        depthwiseInitializer: glorot(), pointwiseInitializer: glorot(),
        name: 'backbone_sep2',
      })
      .apply(x) as tf.SymbolicTensor
  }
  // inception flavor: mixed-kernel tower concat
  const stem = conv(input, 8, 3, 2, 'stem')
  const t1 = conv(stem, 8, 1, 1, 'tower1x1')
  const t3 = conv(stem, 8, 3, 1, 'tower3x3')
  const t5 = conv(stem, 8, 5, 1, 'tower5x5')
  const mixed = tf.layers
    .concatenate({ name: 'backbone_mixed' })
    .apply([t1, t3, t5]) as tf.SymbolicTensor
  return conv(mixed, 32, 3, 2, 'reduce')
}

export function buildExtractor(config: ResolvedConfig): Extractor {
  const seeds = new SeedSequence(config.seed)
  const input = tf.input({
    shape: [config.inputResolution, config.inputResolution, 3],
    name: 'image',
  })
  const features = backboneStack(config.backbone, input, seeds)
  const pooled = tf.layers
    .globalAveragePooling2d({ name: 'head_pool' })
    .apply(features) as tf.SymbolicTensor
  const fc1 = tf.layers
    .dense({
      units: FC_UNITS, activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed: seeds.take() }),
      name: 'head_fc1',
    })
    .apply(pooled) as tf.SymbolicTensor
  const fc2 = tf.layers
    .dense({
      units: FC_UNITS, activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed: seeds.take() }),
      name: FC_SOURCE_LAYER,
    })
    .apply(fc1) as tf.SymbolicTensor
  const scores = tf.layers
    .dense({
      units: config.roster.length, activation: 'softmax',
      kernelInitializer: tf.initializers.glorotUniform({ seed: seeds.take() }),
      name: 'head_scores',
    })
    .apply(fc2) as tf.SymbolicTensor

  const model = tf.model({ inputs: input, outputs: [fc2, scores] })
  const classifier = tf.model({ inputs: input, outputs: scores })
  return { config, model, classifier }
}

/** The backbones' canonical pixel pipeline: bytes [0, 255] -> [-1, 1]. */
export function preprocess(batch: tf.Tensor4D): tf.Tensor4D {
  return tf.tidy(() => batch.div(127.5).sub(1.0))
}

export function setBackboneTrainable(extractor: Extractor, trainable: boolean): void {
  for (const layer of extractor.model.layers) {
    if (layer.name.startsWith('backbone_')) layer.trainable = trainable
  }
}

function backboneLayers(extractor: Extractor): tf.layers.Layer[] {
  return extractor.model.layers.filter((l) => l.name.startsWith('backbone_'))
}

/** Stable digest of every backbone weight; unchanged means frozen held. */
export function backboneChecksum(extractor: Extractor): string {
  const hash = createHash('sha256')
  for (const layer of backboneLayers(extractor)) {
    for (const weight of layer.getWeights()) {
      hash.update(layer.name)
      hash.update(JSON.stringify(weight.shape))
      hash.update(Buffer.from((weight.dataSync() as Float32Array).buffer.slice(0)))
    }
  }
  return hash.digest('hex')
}

interface WeightsFile {
  layers: { name: string; weights: { shape: number[]; values: number[] }[] }[]
}

export function saveWeights(extractor: Extractor, path: string): void {
  const payload: WeightsFile = {
    layers: extractor.model.layers
      .filter((l) => l.getWeights().length > 0)
      .map((l) => ({
        name: l.name,
        weights: l.getWeights().map((w) => ({
          shape: [...w.shape],
          values: Array.from(w.dataSync()),
        })),
      })),
  }
  writeFileSync(path, JSON.stringify(payload))
}

export function loadWeights(extractor: Extractor, path: string): void {
  const payload = JSON.parse(readFileSync(path, 'utf-8')) as WeightsFile
  for (const entry of payload.layers) {
    const layer = extractor.model.getLayer(entry.name)
    layer.setWeights(
      entry.weights.map((w) => tf.tensor(w.values, w.shape as number[])),
    )
  }
}
