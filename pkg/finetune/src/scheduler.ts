/**
 * Learning-rate scheduler: multiply the rate by `factor` once `patience`
 * consecutive epochs fail to improve the monitored validation metric.
 */

export class PlateauScheduler {
  private best = -Infinity;
  private badEpochs = 0;

  constructor(
    public learningRate: number,
    private readonly factor: number,
    private readonly patience: number,
  ) {
    if (factor <= 0 || factor >= 1) throw new Error("anneal factor must be in (0, 1)");
    if (patience < 0) throw new Error("patience must be non-negative");
  }

  /**
   * Feed one epoch's validation metric. Returns true when the learning rate
   * was annealed at the end of this epoch.
   */
  step(metric: number): boolean {
    if (metric > this.best) {
      this.best = metric;
      this.badEpochs = 0;
      return false;
    }
    this.badEpochs += 1;
    if (this.badEpochs >= Math.max(1, this.patience)) {
      this.learningRate *= this.factor;
      this.badEpochs = 0;
      return true;
    }
    return false;
  }

  get bestMetric(): number {
    return this.best;
  }
}
