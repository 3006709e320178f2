import { createHash } from 'node:crypto'
import { readFileSync, writeFileSync } from 'node:fs'
import { basename } from 'node:path'

import * as tf from '@tensorflow/tfjs'

import { ResolvedConfig } from './config.js'
import { Extractor, FC_SOURCE_LAYER, preprocess } from './model.js'
import { decodeNetpbm } from './ppm.js'

export interface LabeledImage {
  path: string
  subject: string
  session: string
}

export interface ExtractResult {
  /** template records written (two per successfully read image) */
  records: number
  /** unreadable images skipped */
  warnings: number
  outPath: string
  manifestPath: string
}

interface LoadedImage extends LabeledImage {
  tensor: tf.Tensor3D
  sha256: string
}

function loadImage(entry: LabeledImage, resolution: number): LoadedImage {
  const data = readFileSync(entry.path)
  const image = decodeNetpbm(new Uint8Array(data))
  const tensor = tf.tidy(() => {
    const raw = tf.tensor3d(image.pixels, [image.height, image.width, 3], 'float32')
    return tf.image.resizeBilinear(raw, [resolution, resolution])
  })
  const sha256 = createHash('sha256').update(data).digest('hex')
  return { ...entry, tensor, sha256 }
}

/**
 * Per-image source tags keep template keys unique when a subject has
 * several images in one session: the template file format dedupes on
 * (subject, session, source, layer).
 */
function sourceTag(tag: string, entry: LabeledImage): string {
  return `${tag}:${basename(entry.path)}`
}

function templateLine(
  entry: LabeledImage, tag: string, layer: 'fc' | 'score', features: number[],
): string {
  return JSON.stringify({
    subject: entry.subject,
    session: entry.session,
    source: sourceTag(tag, entry),
    layer,
    features,
  })
}

/**
 * Runs the extractor over labeled images and writes one fc-layer and one
 * score-layer template record per readable image, in the biomatch
 * JSON-lines template format, plus a run manifest. Unreadable images are
 * skipped and counted. Inference is deterministic: the same inputs and
 * weights always produce identical files.
 */
export async function extractToFile(options: {
  extractor: Extractor
  images: LabeledImage[]
  outPath: string
  manifestPath?: string
  /** provenance prefix for the source tag; defaults to the backbone name */
  tag?: string
}): Promise<ExtractResult> {
  const { extractor, images, outPath } = options
  const config = extractor.config
  const manifestPath = options.manifestPath ?? `${outPath}.manifest.json`
  const tag = options.tag ?? config.backbone

  const loaded: LoadedImage[] = []
  let warnings = 0
  for (const entry of images) {
    try {
      loaded.push(loadImage(entry, config.inputResolution))
    } catch (err) {
      warnings++
      console.warn(`skipping unreadable image ${entry.path}: ${(err as Error).message}`)
    }
  }

  const lines: string[] = []
  if (loaded.length > 0) {
    const [fcArr, scoreArr] = tf.tidy(() => {
      const batch = tf.stack(loaded.map((img) => img.tensor)) as tf.Tensor4D
      const [fc, scores] = extractor.model.predict(preprocess(batch)) as tf.Tensor[]
      return [fc.arraySync() as number[][], scores.arraySync() as number[][]]
    })
    loaded.forEach((img) => img.tensor.dispose())
    for (let i = 0; i < loaded.length; i++) {
      lines.push(templateLine(loaded[i], tag, 'fc', fcArr[i]))
      lines.push(templateLine(loaded[i], tag, 'score', scoreArr[i]))
    }
  }
  writeFileSync(outPath, lines.map((l) => l + '\n').join(''), 'utf-8')

  const manifest = {
    backbone: config.backbone,
    stage: config.stage,
    input_resolution: config.inputResolution,
    seed: config.seed,
    roster: config.roster,
    fc_source_layer: FC_SOURCE_LAYER,
    fc_units: 512,
    source_tag_rule: `${tag}:<image basename>`,
    hyperparameters: {
      stage1: { epochs: config.stage1.epochs, learning_rate: config.stage1.learningRate },
      stage2: { epochs: config.stage2.epochs, learning_rate: config.stage2.learningRate },
    },
    images: loaded.map((img) => ({ path: img.path, sha256: img.sha256 })),
    warnings,
  }
  writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + '\n', 'utf-8')

  return { records: lines.length, warnings, outPath, manifestPath }
}

/** Decode + resize + preprocess a labeled image list into a training batch. */
export function imageBatch(
  images: LabeledImage[], config: ResolvedConfig,
): { xs: tf.Tensor4D; entries: LabeledImage[] } {
  const loaded = images.map((entry) => loadImage(entry, config.inputResolution))
  const xs = tf.tidy(() => {
    const batch = tf.stack(loaded.map((img) => img.tensor)) as tf.Tensor4D
    return preprocess(batch)
  })
  loaded.forEach((img) => img.tensor.dispose())
  return { xs, entries: images }
}
