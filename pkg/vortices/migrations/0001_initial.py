from django.db import migrations, models
import django.utils.timezone


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SimulationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('mode', models.CharField(choices=[('euler', 'Euler (inviscid)'), ('ns', 'Navier-Stokes (random vortex)'), ('bound_replay', 'Bound replay'), ('report', 'Confinement report')], max_length=20)),
                ('status', models.CharField(choices=[('running', 'Running'), ('complete', 'Complete'), ('incomplete', 'Incomplete')], default='running', max_length=20)),
                ('output_dir', models.CharField(help_text='Directory holding the run artifacts', max_length=500)),
                ('manifest_path', models.CharField(blank=True, max_length=500)),
                ('config', models.JSONField(default=dict, help_text='Validated run configuration')),
                ('exit_code', models.IntegerField(blank=True, null=True)),
                ('created_at', models.DateTimeField(default=django.utils.timezone.now)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'verbose_name': 'Simulation Run',
                'verbose_name_plural': 'Simulation Runs',
                'ordering': ['-created_at'],
            },
        ),
    ]
