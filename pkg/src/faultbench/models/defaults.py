"""Default architecture hyperparameters.

Layer widths and kernel schedules for the custom models are reconstructions;
change them here (or override per experiment through the ``[model]`` config
section) to align with another release.
"""

MODEL_DEFAULTS = {
    "mlp_widths": (512, 256, 128, 64, 32),
    "cnn5_channels": (16, 32, 64, 128, 256),
    "cnn5_kernel": 3,
    "cnn5_pool_target": 4,
    "cnn5_hidden": 256,
    "dropout": 0.5,
    "alexnet_fc_width": 4096,
    "lenet_pool_target": 5,
    "resnet_channels": (64, 128, 256, 512),
    "ae1d_widths": (256, 128, 64),
    "ae2d_channels": (16, 32, 64),
    "ae2d_code": 128,
    "ae_classifier_hidden": 64,
    "ae_phase1_fraction": 0.5,
    "dae_noise_std": 0.1,
    "sae_rho": 0.05,
    "sae_weight": 1.0,
    "lstm_hidden": 64,
    "lstm_steps_1d": 32,
}


def resolve(overrides=None):
    cfg = dict(MODEL_DEFAULTS)
    if overrides:
        unknown = set(overrides) - set(cfg)
        if unknown:
            from ..errors import ConfigurationError

            raise ConfigurationError(f"unknown model options: {sorted(unknown)}")
        cfg.update(overrides)
    return cfg
