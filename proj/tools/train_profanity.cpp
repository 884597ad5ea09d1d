// Trains the character n-gram profanity scorer on a labeled JSONL corpus
// ({"text": ..., "profane": true|false} per line) and writes the weights.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "depfuse/lexfeat.hpp"

int main(int argc, char** argv) {
  CLI::App app{"train the profanity scorer"};
  std::string corpus, out = "profanity.weights";
  depfuse::ProfanityTrainOptions opts;
  app.add_option("corpus", corpus)->required();
  app.add_option("--out", out)->capture_default_str();
  app.add_option("--epochs", opts.epochs)->capture_default_str();
  app.add_option("--lr", opts.learning_rate)->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    const auto data = depfuse::load_profanity_jsonl(corpus);
    const auto model = depfuse::ProfanityModel::train(data, opts);
    model.save(out);
    std::size_t correct = 0;
    for (const auto& ex : data) correct += (model.score(ex.text) >= 0.5) == ex.profane;
    std::cout << "trained on " << data.size() << " examples, train accuracy "
              << static_cast<double>(correct) / static_cast<double>(data.size()) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
