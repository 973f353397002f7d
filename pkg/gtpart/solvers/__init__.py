# solver families: cis, partition, guided_split, baselines
