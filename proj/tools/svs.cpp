#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "svs/app.hpp"

namespace {

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += " ";
        s += argv[i];
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"desk-scale prompt-controlled singing voice synthesis"};
    cli.require_subcommand(1);

    std::string config_path;
    std::string assets_dir;
    std::string override_json;
    uint64_t seed = 0;
    bool seed_given = false;
    cli.add_option("--config", config_path, "run configuration file (JSON)");
    cli.add_option("--assets", assets_dir, "prompt asset directory");
    cli.add_option("--set", override_json, "inline JSON merged over the config");
    cli.add_option("--seed", seed, "rng seed (mandatory for training)")
        ->each([&seed_given](const std::string&) { seed_given = true; });

    // prepare-data
    auto* prep = cli.add_subcommand("prepare-data", "validate a corpus manifest");
    svs::app::PrepareDataArgs prep_args;
    std::string prep_kind = "singing";
    prep->add_option("--manifest", prep_args.manifest, "input manifest (JSONL)")->required();
    prep->add_option("--kind", prep_kind, "singing|speech");
    prep->add_option("--out", prep_args.out_dir, "output directory")->required();

    // train-codec
    auto* tcodec = cli.add_subcommand("train-codec", "train the RVQ codec");
    svs::app::TrainCodecArgs tcodec_args;
    tcodec->add_option("--prepared", tcodec_args.prepared, "prepared.jsonl paths")->required();
    tcodec->add_option("--out", tcodec_args.out_checkpoint, "codec checkpoint")->required();
    tcodec->add_option("--run-dir", tcodec_args.run.run_dir, "run directory");

    // encode / decode
    auto* enc = cli.add_subcommand("encode", "audio -> acoustic units");
    svs::app::EncodeArgs enc_args;
    enc->add_option("--codec", enc_args.codec_checkpoint, "codec checkpoint")->required();
    enc->add_option("--audio", enc_args.audio, "input wav")->required();
    enc->add_option("--out", enc_args.out_units, "output units file")->required();

    auto* dec = cli.add_subcommand("decode", "acoustic units -> waveform");
    svs::app::DecodeArgs dec_args;
    dec->add_option("--codec", dec_args.codec_checkpoint, "codec checkpoint")->required();
    dec->add_option("--units", dec_args.units, "input units file")->required();
    dec->add_option("--out", dec_args.out_wav, "output wav")->required();

    // train-model
    auto* tmodel = cli.add_subcommand("train-model", "train the multi-scale transformer");
    svs::app::TrainModelArgs tmodel_args;
    tmodel->add_option("--prepared", tmodel_args.prepared, "prepared.jsonl paths")->required();
    tmodel->add_option("--codec", tmodel_args.codec_checkpoint, "codec checkpoint")->required();
    tmodel->add_option("--out", tmodel_args.out_checkpoint, "model checkpoint")->required();
    tmodel->add_option("--run-dir", tmodel_args.run.run_dir, "run directory");

    // synthesize
    auto* synth = cli.add_subcommand("synthesize", "prompt + melody + lyrics -> waveform");
    svs::app::SynthesizeArgs synth_args;
    synth->add_option("--model", synth_args.model_checkpoint, "model checkpoint")->required();
    synth->add_option("--codec", synth_args.codec_checkpoint, "codec checkpoint")->required();
    synth->add_option("--prompt", synth_args.prompt, "natural language style prompt")
        ->required();
    synth->add_option("--melody", synth_args.melody, "melody F0 file (one Hz per frame)")
        ->required();
    synth->add_option("--lyrics", synth_args.lyrics, "lyrics file (phoneme duration lines)")
        ->required();
    synth->add_option("--out", synth_args.out_wav, "output wav")->required();

    // evaluate
    auto* eval = cli.add_subcommand("evaluate", "objective evaluation report");
    svs::app::EvaluateArgs eval_args;
    eval->add_option("--manifest", eval_args.manifest, "evaluation manifest")->required();
    eval->add_option("--report", eval_args.report, "output report path")->required();
    eval->add_option("--classifier", eval_args.classifier, "gender classifier file");

    // train-gender-classifier
    auto* tgc = cli.add_subcommand("train-gender-classifier",
                                   "fit the spectral gender classifier");
    svs::app::TrainClassifierArgs tgc_args;
    tgc->add_option("--prepared", tgc_args.prepared, "prepared.jsonl paths")->required();
    tgc->add_option("--out", tgc_args.out_path, "classifier output path")->required();

    // make-toy-data
    auto* toy = cli.add_subcommand("make-toy-data", "generate the synthetic benchmark corpus");
    svs::app::MakeToyDataArgs toy_args;
    std::string toy_kind = "singing";
    toy->add_option("--out", toy_args.out_dir, "output directory")->required();
    toy->add_option("--items", toy_args.items, "number of utterances");
    toy->add_option("--frames", toy_args.frames, "frames per utterance");
    toy->add_option("--kind", toy_kind, "singing|speech");
    toy->add_option("--data-seed", toy_args.seed, "corpus generator seed");

    CLI11_PARSE(cli, argc, argv);

    try {
        svs::RunConfig cfg = config_path.empty() ? svs::RunConfig::defaults()
                                                 : svs::RunConfig::from_file(config_path);
        if (!assets_dir.empty()) cfg.assets_dir = assets_dir;
        if (!override_json.empty()) cfg.apply_json(override_json);
        if (seed_given) {
            cfg.seed = seed;
            cfg.seed_set = true;
        }
        std::fprintf(stderr, "%s\nresolved config:\n%s\n", svs::kVersionString,
                     cfg.resolved_json().c_str());
        const std::string cmdline = join_args(argc, argv);

        if (*prep) {
            prep_args.kind = svs::corpus_kind_from_string(prep_kind);
            const auto res = svs::app::cmd_prepare_data(cfg, prep_args);
            std::fprintf(stderr, "prepared %d rows (%d rejected) -> %s\n", res.accepted,
                         res.rejected, res.prepared_manifest.string().c_str());
        } else if (*tcodec) {
            tcodec_args.run.command_line = cmdline;
            svs::app::cmd_train_codec(cfg, tcodec_args);
        } else if (*enc) {
            svs::app::cmd_encode(cfg, enc_args);
        } else if (*dec) {
            svs::app::cmd_decode(cfg, dec_args);
        } else if (*tmodel) {
            tmodel_args.run.command_line = cmdline;
            svs::app::cmd_train_model(cfg, tmodel_args);
        } else if (*synth) {
            const auto res = svs::app::cmd_synthesize(cfg, synth_args);
            std::fprintf(stderr, "range factor: %d Hz\n", res.range_factor);
        } else if (*eval) {
            svs::app::cmd_evaluate(cfg, eval_args);
        } else if (*tgc) {
            svs::app::cmd_train_gender_classifier(cfg, tgc_args);
        } else if (*toy) {
            toy_args.kind = svs::corpus_kind_from_string(toy_kind);
            const auto res = svs::app::cmd_make_toy_data(cfg, toy_args);
            std::fprintf(stderr, "wrote %d utterances -> %s\n", res.items,
                         res.manifest.string().c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return svs::app::exit_code_for(e);
    }
    return 0;
}
