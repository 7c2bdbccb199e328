from pydantic import BaseModel, Field, NonNegativeInt, PositiveFloat, PositiveInt


class TrainConfig(BaseModel):
    epochs: PositiveInt = 25
    batch_size: PositiveInt = 32
    learning_rate: PositiveFloat = 1e-3
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: PositiveFloat = 1e-8
    seed: NonNegativeInt = Field(
        default=0, description="Seeds weight initialization and minibatch shuffling"
    )
    n_filters: PositiveInt = 32
    hidden: PositiveInt = 128
