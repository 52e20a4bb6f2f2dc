from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="BenchmarkRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                (
                    "command",
                    models.CharField(
                        choices=[
                            ("bench", "Bench"),
                            ("sweep", "Sweep"),
                            ("verify", "Verify"),
                        ],
                        max_length=10,
                    ),
                ),
                ("manifest", models.JSONField(default=dict)),
                ("total_inserts", models.BigIntegerField(default=0)),
                ("aggregate_rate", models.FloatField(default=0.0)),
                ("wall_seconds", models.FloatField(default=0.0)),
                ("verification_passed", models.BooleanField(default=False)),
                ("output_dir", models.CharField(blank=True, max_length=500)),
            ],
            options={
                "ordering": ["-created_at"],
            },
        ),
    ]
